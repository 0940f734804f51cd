#include "sliodf/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sliodf/common.hpp"

namespace sliodf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw contract_error("config: bad numeric value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw contract_error("config: trailing junk in value for " + key);
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw contract_error("config: bad integer value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw contract_error("config: trailing junk in value for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw contract_error("config: bad boolean value for " + key + ": '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  auto dbl = [](double PipelineConfig::*field) {
    return Setter([field](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.*field = parse_double(k, v);
    });
  };
  static const std::map<std::string, Setter> table = {
      {"geometry.screen_distance_cm",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.geometry.screen_distance_cm = parse_double(k, v);
       }},
      {"geometry.display_width_cm",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.geometry.display_width_cm = parse_double(k, v);
       }},
      {"geometry.led_radius_mm",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.geometry.led_radius_mm = parse_double(k, v);
       }},
      {"geometry.pixel_pitch_mm",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.geometry.pixel_pitch_mm = parse_double(k, v);
       }},
      {"pattern.width",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.pattern_width = static_cast<int>(parse_int(k, v));
       }},
      {"pattern.height",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.pattern_height = static_cast<int>(parse_int(k, v));
       }},
      {"preprocess.sigma_g", dbl(&PipelineConfig::centroid_sigma)},
      {"preprocess.normalize",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.normalize_patterns = parse_bool(k, v);
       }},
      {"grid.nside_signal",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.nside_signal = static_cast<int>(parse_int(k, v));
       }},
      {"grid.nside_fodf",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.nside_fodf = static_cast<int>(parse_int(k, v));
       }},
      {"grid.theta_max_deg", dbl(&PipelineConfig::theta_max_deg)},
      {"sh.l_max",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.l_max = static_cast<int>(parse_int(k, v));
       }},
      {"kernel.alpha",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.alpha = parse_double(k, v);
       }},
      {"kernel.sigma",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.sigma = parse_double(k, v);
       }},
      {"kernel.centre_x",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.centre.x() = parse_double(k, v);
       }},
      {"kernel.centre_y",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.centre.y() = parse_double(k, v);
       }},
      {"kernel.centre_z",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.centre.z() = parse_double(k, v);
       }},
      {"kernel.normalize",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.kernel.normalize = parse_bool(k, v);
       }},
      {"loss.lambda_r",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.loss.lambda_r = parse_double(k, v);
       }},
      {"loss.lambda_s",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.loss.lambda_s = parse_double(k, v);
       }},
      {"loss.sigma_s",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.loss.sigma_s = parse_double(k, v);
       }},
      {"loss.smooth_fodf",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.loss.smooth_fodf = parse_bool(k, v);
       }},
      {"solve.max_iters",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solve.max_iters = static_cast<int>(parse_int(k, v));
       }},
      {"solve.step",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solve.step = parse_double(k, v);
       }},
      {"solve.tol",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solve.tol = parse_double(k, v);
       }},
      {"solve.seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.solve.seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
      {"net.width_0",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.net_widths[0] = static_cast<int>(parse_int(k, v));
       }},
      {"net.width_1",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.net_widths[1] = static_cast<int>(parse_int(k, v));
       }},
      {"net.width_2",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.net_widths[2] = static_cast<int>(parse_int(k, v));
       }},
      {"net.cheb_order",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.cheb_order = static_cast<int>(parse_int(k, v));
       }},
      {"net.leaky_slope", dbl(&PipelineConfig::leaky_slope)},
      {"train.lr",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.lr = parse_double(k, v);
       }},
      {"train.batch",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.batch = static_cast<int>(parse_int(k, v));
       }},
      {"train.epochs",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.epochs = static_cast<int>(parse_int(k, v));
       }},
      {"train.weight_decay",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.weight_decay = parse_double(k, v);
       }},
      {"train.seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
      {"synth.count",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.synth_count = static_cast<int>(parse_int(k, v));
       }},
      {"synth.max_fibres",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.synth_max_fibres = static_cast<int>(parse_int(k, v));
       }},
      {"synth.noise", dbl(&PipelineConfig::synth_noise)},
      {"synth.theta_f_max_deg", dbl(&PipelineConfig::synth_theta_f_max_deg)},
      {"synth.seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.synth_seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw contract_error("config: line " + std::to_string(lineno) + " has no '='");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw contract_error("config: unknown key '" + key + "'");
    it->second(c, key, value);
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "# Pipeline configuration. Angles in degrees where the key says so,\n"
       "# radians never appear in this file.\n\n";
  o << "# Bench geometry\n";
  o << "geometry.screen_distance_cm = " << c.geometry.screen_distance_cm << "\n";
  o << "geometry.display_width_cm = " << c.geometry.display_width_cm << "\n";
  o << "geometry.led_radius_mm = " << c.geometry.led_radius_mm << "\n";
  o << "geometry.pixel_pitch_mm = " << c.geometry.pixel_pitch_mm << "\n\n";
  o << "# Raster shape\n";
  o << "pattern.width = " << c.pattern_width << "\n";
  o << "pattern.height = " << c.pattern_height << "\n\n";
  o << "# Centroid search and optional per-pattern max normalization\n";
  o << "preprocess.sigma_g = " << c.centroid_sigma << "\n";
  o << "preprocess.normalize = " << (c.normalize_patterns ? "true" : "false") << "\n\n";
  o << "# Sphere resolutions and cap\n";
  o << "grid.nside_signal = " << c.nside_signal << "\n";
  o << "grid.nside_fodf = " << c.nside_fodf << "\n";
  o << "grid.theta_max_deg = " << c.theta_max_deg << "\n\n";
  o << "# Even-degree harmonic band limit\n";
  o << "sh.l_max = " << c.l_max << "\n\n";
  o << "# Single-fibre kernel\n";
  o << "kernel.alpha = " << c.kernel.alpha << "\n";
  o << "kernel.sigma = " << c.kernel.sigma << "\n";
  o << "kernel.centre_x = " << c.kernel.centre.x() << "\n";
  o << "kernel.centre_y = " << c.kernel.centre.y() << "\n";
  o << "kernel.centre_z = " << c.kernel.centre.z() << "\n";
  o << "kernel.normalize = " << (c.kernel.normalize ? "true" : "false") << "\n\n";
  o << "# Loss weights\n";
  o << "loss.lambda_r = " << c.loss.lambda_r << "\n";
  o << "loss.lambda_s = " << c.loss.lambda_s << "\n";
  o << "loss.sigma_s = " << c.loss.sigma_s << "\n";
  o << "loss.smooth_fodf = " << (c.loss.smooth_fodf ? "true" : "false") << "\n\n";
  o << "# Direct solver\n";
  o << "solve.max_iters = " << c.solve.max_iters << "\n";
  o << "solve.step = " << c.solve.step << "\n";
  o << "solve.tol = " << c.solve.tol << "\n";
  o << "solve.seed = " << c.solve.seed << "\n\n";
  o << "# Network\n";
  o << "net.width_0 = " << c.net_widths[0] << "\n";
  o << "net.width_1 = " << c.net_widths[1] << "\n";
  o << "net.width_2 = " << c.net_widths[2] << "\n";
  o << "net.cheb_order = " << c.cheb_order << "\n";
  o << "net.leaky_slope = " << c.leaky_slope << "\n\n";
  o << "# Training\n";
  o << "train.lr = " << c.train.lr << "\n";
  o << "train.batch = " << c.train.batch << "\n";
  o << "train.epochs = " << c.train.epochs << "\n";
  o << "train.weight_decay = " << c.train.weight_decay << "\n";
  o << "train.seed = " << c.train.seed << "\n\n";
  o << "# Synthetic data generation\n";
  o << "synth.count = " << c.synth_count << "\n";
  o << "synth.max_fibres = " << c.synth_max_fibres << "\n";
  o << "synth.noise = " << c.synth_noise << "\n";
  o << "synth.theta_f_max_deg = " << c.synth_theta_f_max_deg << "\n";
  o << "synth.seed = " << c.synth_seed << "\n";
  return o.str();
}

double effective_theta_max(const PipelineConfig& c) {
  PatternCentroid centre{(c.pattern_width - 1) / 2.0, (c.pattern_height - 1) / 2.0};
  const double coverage =
      raster_coverage_theta(c.pattern_width, c.pattern_height, centre, c.geometry);
  return std::min(c.theta_max_deg * deg, coverage);
}

NetSpec net_spec_from(const PipelineConfig& c) {
  NetSpec s;
  s.nside_in = c.nside_signal;
  s.nside_fodf = c.nside_fodf;
  s.widths = c.net_widths;
  s.cheb_order = c.cheb_order;
  s.leaky_slope = c.leaky_slope;
  return s;
}

}  // namespace sliodf
