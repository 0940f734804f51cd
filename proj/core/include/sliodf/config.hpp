#pragma once

#include <string>

#include "sliodf/estimation.hpp"
#include "sliodf/net.hpp"
#include "sliodf/projection.hpp"

namespace sliodf {

// Everything the pipeline reads from a config file, with the tool defaults.
struct PipelineConfig {
  MicroscopeGeometry geometry;

  int pattern_width = 81;
  int pattern_height = 81;

  double centroid_sigma = 2.0;  // pixels
  bool normalize_patterns = false;

  int nside_signal = 16;
  int nside_fodf = 4;
  double theta_max_deg = 60.0;

  int l_max = 8;

  EllipsoidKernelParams kernel;
  LossWeights loss;
  SolveOptions solve;

  std::array<int, 3> net_widths{16, 32, 64};
  int cheb_order = 5;
  double leaky_slope = 0.1;
  TrainConfig train;

  int synth_count = 100;
  int synth_max_fibres = 3;
  double synth_noise = 0.0;
  double synth_theta_f_max_deg = 45.0;
  std::uint64_t synth_seed = 0;
};

// key = value lines, # comments. Unknown keys and malformed values throw
// contract_error.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);

// Full listing of every key with its current value; parse(serialize(c)) == c.
std::string serialize_config(const PipelineConfig& c);

// The smallest of the configured cap angle and the angle the raster actually
// covers in all azimuths around its geometric center. Masks built with this
// angle keep the projection free of systematic polar gaps.
double effective_theta_max(const PipelineConfig& c);

NetSpec net_spec_from(const PipelineConfig& c);

}  // namespace sliodf
