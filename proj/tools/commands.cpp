#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "sdcnn/checkpoint.hpp"
#include "sdcnn/codec.hpp"
#include "sdcnn/dataset.hpp"
#include "sdcnn/file_util.hpp"
#include "sdcnn/image_io.hpp"
#include "sdcnn/metrics.hpp"
#include "sdcnn/text_format.hpp"
#include "sdcnn/trainer.hpp"

namespace fs = std::filesystem;

namespace sdcnn::cli {
namespace {

bool has_extension(const fs::path& path, std::string_view ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e == ext;
}

struct YuvGeometry {
  int width = 0;
  int height = 0;
  int frame = 0;
};

// PGM by default; raw 4:2:0 luma when the file ends in .yuv.
Frame read_frame(const fs::path& path, const YuvGeometry& yuv, RunManifest& manifest) {
  const std::string bytes = read_file(path);
  manifest.add_input(path, bytes);
  if (has_extension(path, ".yuv")) {
    if (yuv.width < 1 || yuv.height < 1) {
      throw Error(ErrorKind::InvalidArgument, path.string() + ": .yuv input needs --width and --height");
    }
    return load_yuv420_luma(path, yuv.width, yuv.height, yuv.frame);
  }
  return parse_pgm(bytes);
}

std::string encode_frame(const fs::path& path, const Frame& frame) {
  if (has_extension(path, ".yuv")) {
    std::string bytes(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
    bytes.resize(yuv420_frame_bytes(frame.width, frame.height), static_cast<char>(128));
    return bytes;
  }
  return encode_pgm(frame);
}

std::vector<fs::path> pgm_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_extension(entry.path(), ".pgm")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

InitStrategy parse_init(const std::string& name, double stddev) {
  if (name == "he") return InitStrategy::he();
  return InitStrategy::gaussian(0.0, stddev);
}

// ---------------------------------------------------------------- degrade

struct DegradeArgs {
  std::string in, out, rd_out;
  int qp = 0;
  YuvGeometry yuv;
};

void run_degrade(const DegradeArgs& a) {
  RunManifest manifest{"degrade", {{"in", a.in}, {"qp", std::to_string(a.qp)}, {"out", a.out}, {"rd-out", a.rd_out}}};
  const Frame original = read_frame(a.in, a.yuv, manifest);
  const DegradeResult degraded = degrade_frame(original, a.qp);
  const double quality = psnr(degraded.frame, original);

  OutputSet outputs;
  outputs.add(a.out, encode_frame(a.out, degraded.frame));
  if (!a.rd_out.empty()) {
    std::string csv;
    if (fs::exists(a.rd_out)) {
      csv = read_file(a.rd_out);
      parse_rd_csv(csv);  // refuse to append to something that is not an RD table
      if (!csv.empty() && csv.back() != '\n') csv += '\n';
    } else {
      csv = std::string(kRdCsvHeader) + "\n";
    }
    csv += format_rd_row({degraded.bits, quality});
    outputs.add(a.rd_out, std::move(csv));
  }
  manifest.stage(outputs, a.out);
  outputs.commit();
  std::cout << "bits," << format_real(degraded.bits) << "\npsnr," << format_real(quality) << "\n";
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data, config, out, log, spec, init = "gaussian", from, degraded;
  int qp = 0;
  double init_std = 0.002;
  bool quiet = false;
};

void run_train(const TrainArgs& a) {
  RunManifest manifest{"train",
                       {{"data", a.data},
                        {"qp", std::to_string(a.qp)},
                        {"config", a.config},
                        {"out", a.out},
                        {"log", a.log},
                        {"spec", a.spec},
                        {"init", a.init},
                        {"init-std", format_real(a.init_std)},
                        {"from", a.from},
                        {"degraded", a.degraded}}};
  const std::string config_text = read_file(a.config);
  manifest.add_input(a.config, config_text);
  const TrainConfig config = parse_train_config(config_text);
  manifest.seed = config.seed;

  const auto files = pgm_files(a.data);
  if (files.empty()) throw Error(ErrorKind::InvalidArgument, "no .pgm images in " + a.data);
  std::vector<Frame> truth;
  for (const auto& f : files) truth.push_back(read_frame(f, {}, manifest));

  std::vector<PatchPair> dataset;
  if (a.degraded.empty()) {
    dataset = build_dataset(truth, a.qp);
  } else {
    std::vector<Frame> degraded;
    for (const auto& f : files) degraded.push_back(read_frame(fs::path(a.degraded) / f.filename(), {}, manifest));
    dataset = build_dataset_from_pairs(truth, degraded);
  }
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "images are too small to yield any 32x32 patch");

  Checkpoint start;
  if (!a.from.empty()) {
    const std::string bytes = read_file(a.from);
    manifest.add_input(a.from, bytes);
    start = parse_checkpoint(bytes);
  } else {
    NetworkSpec spec = sdcnn_default_spec();
    if (!a.spec.empty()) {
      const std::string text = read_file(a.spec);
      manifest.add_input(a.spec, text);
      spec = parse_network_spec(text);
    }
    start = build_network(spec, parse_init(a.init, a.init_std), config.seed);
  }
  start.qp = a.qp;

  if (!a.quiet) {
    std::cerr << files.size() << " images, " << dataset.size() << " patch pairs, " << config.iterations
              << " iterations\n";
  }
  const TrainResult result = train(start, dataset, config, [&](const TrainRecord& r) {
    if (!a.quiet) {
      std::cerr << "iter " << r.iteration << " train_loss " << format_real(r.train_loss) << " val_loss "
                << format_real(r.val_loss) << " val_psnr " << format_real(r.val_psnr) << "\n";
    }
  });

  OutputSet outputs;
  outputs.add(a.out, serialize_checkpoint(result.checkpoint));
  outputs.add(a.log, result.log.to_csv());
  manifest.stage(outputs, a.out);
  outputs.commit();
}

// ---------------------------------------------------------------- transfer

struct TransferArgs {
  std::string base, target_spec, out, init = "gaussian";
  int layers = 0;
  double init_std = 0.002;
  std::uint64_t seed = 0;
};

void run_transfer(const TransferArgs& a) {
  RunManifest manifest{"transfer",
                       {{"base", a.base},
                        {"target-spec", a.target_spec},
                        {"layers", std::to_string(a.layers)},
                        {"out", a.out},
                        {"init", a.init},
                        {"init-std", format_real(a.init_std)},
                        {"seed", std::to_string(a.seed)}},
                       a.seed};
  const std::string base_bytes = read_file(a.base);
  manifest.add_input(a.base, base_bytes);
  const std::string spec_text = read_file(a.target_spec);
  manifest.add_input(a.target_spec, spec_text);
  const Checkpoint base = parse_checkpoint(base_bytes);
  const NetworkSpec target = parse_network_spec(spec_text);
  const Checkpoint moved =
      transplant_layers(base, target, static_cast<std::size_t>(a.layers), parse_init(a.init, a.init_std), a.seed);
  OutputSet outputs;
  outputs.add(a.out, serialize_checkpoint(moved));
  manifest.stage(outputs, a.out);
  outputs.commit();
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string ckpt, in, out, truth, report;
  YuvGeometry yuv;
};

void run_infer(const InferArgs& a) {
  if (a.truth.empty() != a.report.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--truth and --report must be given together");
  }
  RunManifest manifest{"infer", {{"ckpt", a.ckpt}, {"in", a.in}, {"out", a.out}, {"truth", a.truth}, {"report", a.report}}};
  const std::string ckpt_bytes = read_file(a.ckpt);
  manifest.add_input(a.ckpt, ckpt_bytes);
  const Checkpoint ckpt = parse_checkpoint(ckpt_bytes);
  manifest.seed = ckpt.seed;
  const Frame degraded = read_frame(a.in, a.yuv, manifest);
  const Frame restored = predict_frame(ckpt, degraded);

  OutputSet outputs;
  outputs.add(a.out, encode_frame(a.out, restored));
  if (!a.truth.empty()) {
    const Frame truth = read_frame(a.truth, a.yuv, manifest);
    std::string report = "metric,value\n";
    report += "psnr_before," + format_real(psnr(degraded, truth)) + "\n";
    report += "psnr_after," + format_real(psnr(restored, truth)) + "\n";
    report += "ssim_before," + format_real(ssim(degraded, truth)) + "\n";
    report += "ssim_after," + format_real(ssim(restored, truth)) + "\n";
    outputs.add(a.report, std::move(report));
  }
  manifest.stage(outputs, a.out);
  outputs.commit();
}

// ---------------------------------------------------------------- bdrate

struct BdArgs {
  std::string anchor, test;
};

void run_bdrate(const BdArgs& a) {
  const RDCurve anchor(parse_rd_csv(read_file(a.anchor)));
  const RDCurve test(parse_rd_csv(read_file(a.test)));
  const double rate = bd_rate(anchor, test);
  const double quality = bd_psnr(anchor, test);
  std::cout << "bd_rate_percent," << format_real(rate) << "\n";
  std::cout << "bd_psnr_db," << format_real(quality) << "\n";
}

void add_yuv_options(CLI::App* cmd, YuvGeometry& yuv) {
  cmd->add_option("--width", yuv.width, "Frame width, required for .yuv input")->check(CLI::PositiveNumber);
  cmd->add_option("--height", yuv.height, "Frame height, required for .yuv input")->check(CLI::PositiveNumber);
  cmd->add_option("--frame", yuv.frame, "Frame index within a .yuv file")->check(CLI::NonNegativeNumber);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::BadMagic:
    case ErrorKind::VersionMismatch:
    case ErrorKind::Truncated:
    case ErrorKind::UnsupportedFormat:
      return kExitIo;
    case ErrorKind::NonFinite:
      return kExitNumeric;
    case ErrorKind::InvalidArgument:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::OutOfRange:
      return kExitUsage;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  CLI::App app{"SDCNN compression-artifact reduction: degrade, train, transfer, infer, bdrate"};
  app.require_subcommand(1);

  DegradeArgs degrade;
  auto* c_degrade = app.add_subcommand("degrade", "Compress a frame with the block-DCT proxy codec");
  c_degrade->add_option("--in", degrade.in, "Input frame (.pgm, or .yuv with --width/--height)")
      ->required()
      ->check(CLI::ExistingFile);
  c_degrade->add_option("--qp", degrade.qp, "Quantization parameter in [0, 51]")->required()->check(CLI::Range(0, 51));
  c_degrade->add_option("--out", degrade.out, "Degraded frame (.pgm or .yuv)")->required();
  c_degrade->add_option("--rd-out", degrade.rd_out, "RD csv to append (rate,psnr) to");
  add_yuv_options(c_degrade, degrade.yuv);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a network on a directory of PGM images");
  c_train->add_option("--data", tr.data, "Directory of ground-truth .pgm images")->required()->check(CLI::ExistingDirectory);
  c_train->add_option("--qp", tr.qp, "Quantization parameter of the training degradation")
      ->required()
      ->check(CLI::Range(0, 51));
  c_train->add_option("--config", tr.config, "Training config (key = value)")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out, "Output checkpoint")->required();
  c_train->add_option("--log", tr.log, "Output training log csv")->required();
  c_train->add_option("--spec", tr.spec, "Network spec file (default: the six-layer SDCNN)")->check(CLI::ExistingFile);
  c_train->add_option("--init", tr.init, "Initialization of a fresh network")
      ->check(CLI::IsMember({"gaussian", "he"}))
      ->capture_default_str();
  c_train->add_option("--init-std", tr.init_std, "Standard deviation for --init gaussian")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_option("--from", tr.from, "Start from this checkpoint instead of a fresh network")
      ->check(CLI::ExistingFile);
  c_train->add_option("--degraded", tr.degraded,
                      "Directory of externally degraded frames with the same file names as --data")
      ->check(CLI::ExistingDirectory);
  c_train->add_flag("--quiet", tr.quiet, "Do not print progress");

  TransferArgs tf;
  auto* c_transfer = app.add_subcommand("transfer", "Transplant the first k layers of a checkpoint into a new network");
  c_transfer->add_option("--base", tf.base, "Source checkpoint")->required()->check(CLI::ExistingFile);
  c_transfer->add_option("--target-spec", tf.target_spec, "Target network spec file")
      ->required()
      ->check(CLI::ExistingFile);
  c_transfer->add_option("--layers", tf.layers, "Number of leading layers to copy")
      ->required()
      ->check(CLI::NonNegativeNumber);
  c_transfer->add_option("--out", tf.out, "Output checkpoint")->required();
  c_transfer->add_option("--init", tf.init, "Initialization of the remaining layers")
      ->check(CLI::IsMember({"gaussian", "he"}))
      ->capture_default_str();
  c_transfer->add_option("--init-std", tf.init_std, "Standard deviation for --init gaussian")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_transfer->add_option("--seed", tf.seed, "Seed for the remaining layers")->capture_default_str();

  InferArgs inf;
  auto* c_infer = app.add_subcommand("infer", "Restore a degraded frame with a trained checkpoint");
  c_infer->add_option("--ckpt", inf.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  c_infer->add_option("--in", inf.in, "Degraded frame")->required()->check(CLI::ExistingFile);
  c_infer->add_option("--out", inf.out, "Restored frame")->required();
  c_infer->add_option("--truth", inf.truth, "Ground-truth frame for the quality report")->check(CLI::ExistingFile);
  c_infer->add_option("--report", inf.report, "Quality report csv (metric,value)");
  add_yuv_options(c_infer, inf.yuv);

  BdArgs bd;
  auto* c_bd = app.add_subcommand("bdrate", "Bjontegaard delta rate and PSNR between two RD curves");
  c_bd->add_option("--anchor", bd.anchor, "Anchor RD csv (rate,psnr)")->required()->check(CLI::ExistingFile);
  c_bd->add_option("--test", bd.test, "Test RD csv (rate,psnr)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_degrade) run_degrade(degrade);
    if (*c_train) run_train(tr);
    if (*c_transfer) run_transfer(tf);
    if (*c_infer) run_infer(inf);
    if (*c_bd) run_bdrate(bd);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace sdcnn::cli
