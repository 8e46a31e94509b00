// Writes a deterministic corpus of synthetic natural-looking PGM images.
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdcnn/image_io.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic greyscale test images"};
  std::string out_dir;
  int count = 20, width = 128, height = 128;
  std::uint64_t seed = 1;
  app.add_option("--out-dir", out_dir, "Directory to write img_NNN.pgm files into")->required();
  app.add_option("--count", count, "Number of images")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--width", width, "Image width")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--height", height, "Image height")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "Seed of the first image; image i uses seed + i")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.pgm", i);
    sdcnn::save_pgm(sdcnn::synth::natural_image(width, height, seed + static_cast<std::uint64_t>(i)),
                    std::filesystem::path(out_dir) / name);
  }
  std::cout << "wrote " << count << " images to " << out_dir << "\n";
  return 0;
}
