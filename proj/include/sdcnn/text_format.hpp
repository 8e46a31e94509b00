#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sdcnn/metrics.hpp"
#include "sdcnn/model.hpp"
#include "sdcnn/trainer.hpp"

namespace sdcnn {

// Shortest round-trip decimal, independent of the C locale; non-finite values
// print as "inf", "-inf" and "nan".
std::string format_real(double value);
double parse_real(std::string_view text);

// Flat `key = value` lines using exactly the TrainConfig field names; '#'
// starts a comment. Unknown or repeated keys are errors.
TrainConfig parse_train_config(std::string_view text);

// One layer per line: `kind in_ch out_ch kernel stride activation` with kind
// conv|deconv and activation relu|linear; '#' starts a comment.
NetworkSpec parse_network_spec(std::string_view text);
std::string format_network_spec(const NetworkSpec& spec);

// `rate,psnr` header, one point per line.
std::vector<RDPoint> parse_rd_csv(std::string_view text);
std::string format_rd_row(const RDPoint& point);
inline constexpr std::string_view kRdCsvHeader = "rate,psnr";

}  // namespace sdcnn
