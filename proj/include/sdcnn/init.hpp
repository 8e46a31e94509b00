#pragma once

#include <cstdint>
#include <optional>

#include "sdcnn/tensor.hpp"

namespace sdcnn {

// I.i.d. normal samples drawn in canonical order from Rng(seed).
Tensor gaussian_init(const Shape& shape, double mean, double stddev, std::uint64_t seed);

// Rectifier initialization: zero mean, std = sqrt(2 / fan_in). Without an
// explicit fan_in the product of every axis after the first is used, which is
// Cin*k*k for a [Cout,Cin,k,k] convolution kernel.
Tensor he_init(const Shape& shape, std::uint64_t seed, std::optional<int> fan_in = std::nullopt);

double he_stddev(int fan_in);

}  // namespace sdcnn
