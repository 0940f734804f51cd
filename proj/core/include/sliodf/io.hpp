#pragma once

#include <string>
#include <vector>

#include "sliodf/forward_model.hpp"
#include "sliodf/net.hpp"
#include "sliodf/projection.hpp"
#include "sliodf/synthetic.hpp"

namespace sliodf {

// All binary formats are little-endian with a 4-byte magic and a u16 version.
// Write-then-read round trips are bit-identical. Malformed or truncated files
// throw io_error.

// Pattern stacks ("SLIP"): float32 rasters, uniform dimensions.
void write_pattern_stack(const std::string& path, const std::vector<ScatteringPattern>& stack);
std::vector<ScatteringPattern> read_pattern_stack(const std::string& path);

// Groundtruth sidecar: JSON text keyed by pattern index, holding each
// pattern's fibres, noise, and seed plus the shared kernel and geometry.
void write_groundtruth(const std::string& path, const std::vector<SyntheticSpec>& specs);
std::vector<SyntheticSpec> read_groundtruth(const std::string& path);

// Projected signal stacks ("SLSG"): masked values over an explicit pixel set.
struct SignalStack {
  int nside = 0;
  CapMask mask;
  std::vector<Eigen::VectorXd> values;  // one masked vector per pattern
};
void write_signal_stack(const std::string& path, const SignalStack& s);
SignalStack read_signal_stack(const std::string& path);

// fODF stacks ("FODF"): atom weights + SH coefficients per pattern.
struct FodfStack {
  int nside = 0;
  int l_max = 0;
  std::vector<Fodf> fodfs;
};
void write_fodf_stack(const std::string& path, const FodfStack& s);
FodfStack read_fodf_stack(const std::string& path);

// Network checkpoints ("SNET"): architecture header + parameter blob. The
// reader re-derives the architecture hash and rejects any mismatch.
struct Checkpoint {
  std::uint64_t arch_hash = 0;
  NetSpec spec;
  double mask_theta_max = 0.0;
  std::vector<std::int64_t> mask_pixels;
  Eigen::VectorXd params;
};
void write_checkpoint(const std::string& path, const SphericalUNet& net);
Checkpoint read_checkpoint(const std::string& path);

// Rebuilds the network a checkpoint describes and loads its parameters.
SphericalUNet restore_net(const Checkpoint& c);

// Kernel bank cache ("KBNK").
void write_kernel_bank(const std::string& path, const KernelBank& bank);
KernelBank read_kernel_bank(const std::string& path);

}  // namespace sliodf
