#include "sliodf/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "sliodf/common.hpp"

namespace sliodf {

namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian and this code writes native byte order");

template <typename T>
void put(std::ostream& o, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  o.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& i, const char* what) {
  char buf[sizeof(T)];
  i.read(buf, sizeof(T));
  if (!i) throw io_error(std::string("truncated file while reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_magic(std::ostream& o, const char m[4]) { o.write(m, 4); }

void expect_magic(std::istream& i, const char m[4], const char* what) {
  char buf[4];
  i.read(buf, 4);
  if (!i || std::memcmp(buf, m, 4) != 0) {
    throw io_error(std::string("not a ") + what + " file (bad magic)");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw io_error("cannot open for writing: " + path);
  return o;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw io_error("cannot open: " + path);
  return i;
}

void finish(std::ofstream& o, const std::string& path) {
  o.flush();
  if (!o) throw io_error("write failed: " + path);
}

CapMask rebuild_mask(int nside, double theta_max, std::vector<std::int64_t> pixels) {
  CapMask m;
  m.theta_max = theta_max;
  m.position.assign(static_cast<std::size_t>(12LL * nside * nside), -1);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::int64_t p = pixels[i];
    if (p < 0 || p >= static_cast<std::int64_t>(m.position.size())) {
      throw io_error("mask pixel index out of range");
    }
    m.position[static_cast<std::size_t>(p)] = static_cast<Eigen::Index>(i);
  }
  m.pixels = std::move(pixels);
  return m;
}

}  // namespace

void write_pattern_stack(const std::string& path, const std::vector<ScatteringPattern>& stack) {
  require(!stack.empty(), "write_pattern_stack: empty stack");
  const int w = stack.front().width(), h = stack.front().height();
  require(w > 0 && h > 0 && w <= 65535 && h <= 65535, "write_pattern_stack: bad dimensions");
  for (const auto& p : stack) {
    require(p.width() == w && p.height() == h, "write_pattern_stack: ragged stack");
  }
  auto o = open_out(path);
  put_magic(o, "SLIP");
  put<std::uint16_t>(o, 1);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(stack.size()));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(w));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(h));
  put<std::uint8_t>(o, 0);  // float32
  for (const auto& p : stack) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) put<float>(o, static_cast<float>(p.values(y, x)));
    }
  }
  finish(o, path);
}

std::vector<ScatteringPattern> read_pattern_stack(const std::string& path) {
  auto i = open_in(path);
  expect_magic(i, "SLIP", "pattern stack");
  if (get<std::uint16_t>(i, "version") != 1) throw io_error("pattern stack: unknown version");
  const auto count = get<std::uint32_t>(i, "count");
  const int w = get<std::uint16_t>(i, "width");
  const int h = get<std::uint16_t>(i, "height");
  if (get<std::uint8_t>(i, "dtype") != 0) throw io_error("pattern stack: unknown dtype");
  if (w == 0 || h == 0) throw io_error("pattern stack: empty raster");
  std::vector<ScatteringPattern> out(count);
  for (auto& p : out) {
    p.values.resize(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) p.values(y, x) = get<float>(i, "pattern data");
    }
  }
  return out;
}

void write_groundtruth(const std::string& path, const std::vector<SyntheticSpec>& specs) {
  require(!specs.empty(), "write_groundtruth: empty");
  const SyntheticSpec& ref = specs.front();
  for (const auto& s : specs) {
    require(s.kernel.alpha == ref.kernel.alpha && s.kernel.sigma == ref.kernel.sigma &&
                s.kernel.centre == ref.kernel.centre &&
                s.kernel.normalize == ref.kernel.normalize &&
                s.width == ref.width && s.height == ref.height,
            "write_groundtruth: per-pattern kernel/raster settings must match");
  }
  nlohmann::json j;
  j["version"] = 1;
  j["width"] = ref.width;
  j["height"] = ref.height;
  j["kernel"] = {{"alpha", ref.kernel.alpha},
                 {"sigma", ref.kernel.sigma},
                 {"centre", {ref.kernel.centre.x(), ref.kernel.centre.y(), ref.kernel.centre.z()}},
                 {"normalize", ref.kernel.normalize}};
  j["geometry"] = {{"screen_distance_cm", ref.geometry.screen_distance_cm},
                   {"display_width_cm", ref.geometry.display_width_cm},
                   {"led_radius_mm", ref.geometry.led_radius_mm},
                   {"pixel_pitch_mm", ref.geometry.pixel_pitch_mm}};
  nlohmann::json pats = nlohmann::json::object();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    nlohmann::json fibres = nlohmann::json::array();
    for (const WeightedFibre& f : specs[k].fibres) {
      fibres.push_back(
          {{"phi", f.orientation.phi}, {"theta", f.orientation.theta}, {"weight", f.weight}});
    }
    pats[std::to_string(k)] = {
        {"noise", specs[k].noise}, {"seed", specs[k].seed}, {"fibres", fibres}};
  }
  j["patterns"] = pats;

  auto o = open_out(path);
  o << j.dump(2) << "\n";
  finish(o, path);
}

std::vector<SyntheticSpec> read_groundtruth(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("groundtruth: bad JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw io_error("groundtruth: unknown version");
    SyntheticSpec base;
    base.width = j.at("width").get<int>();
    base.height = j.at("height").get<int>();
    const auto& k = j.at("kernel");
    base.kernel.alpha = k.at("alpha").get<double>();
    base.kernel.sigma = k.at("sigma").get<double>();
    base.kernel.centre = Eigen::Vector3d(k.at("centre").at(0).get<double>(),
                                         k.at("centre").at(1).get<double>(),
                                         k.at("centre").at(2).get<double>());
    base.kernel.normalize = k.at("normalize").get<bool>();
    const auto& g = j.at("geometry");
    base.geometry.screen_distance_cm = g.at("screen_distance_cm").get<double>();
    base.geometry.display_width_cm = g.at("display_width_cm").get<double>();
    base.geometry.led_radius_mm = g.at("led_radius_mm").get<double>();
    base.geometry.pixel_pitch_mm = g.at("pixel_pitch_mm").get<double>();

    const auto& pats = j.at("patterns");
    std::vector<SyntheticSpec> out(pats.size(), base);
    std::vector<bool> seen(pats.size(), false);
    for (auto it = pats.begin(); it != pats.end(); ++it) {
      std::size_t idx = 0;
      try {
        idx = static_cast<std::size_t>(std::stoull(it.key()));
      } catch (const std::exception&) {
        throw io_error("groundtruth: non-numeric pattern key '" + it.key() + "'");
      }
      if (idx >= out.size() || seen[idx]) throw io_error("groundtruth: bad pattern index set");
      seen[idx] = true;
      SyntheticSpec& s = out[idx];
      s.noise = it.value().at("noise").get<double>();
      s.seed = it.value().at("seed").get<std::uint64_t>();
      for (const auto& f : it.value().at("fibres")) {
        WeightedFibre wf;
        wf.orientation.phi = f.at("phi").get<double>();
        wf.orientation.theta = f.at("theta").get<double>();
        wf.weight = f.at("weight").get<double>();
        s.fibres.push_back(wf);
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("groundtruth: missing or mistyped field: ") + e.what());
  }
}

void write_signal_stack(const std::string& path, const SignalStack& s) {
  require(s.nside >= 1, "write_signal_stack: bad nside");
  const auto n = static_cast<Eigen::Index>(s.mask.count());
  for (const auto& v : s.values) {
    require(v.size() == n, "write_signal_stack: value/mask size mismatch");
  }
  auto o = open_out(path);
  put_magic(o, "SLSG");
  put<std::uint16_t>(o, 1);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(s.values.size()));
  put<std::uint32_t>(o, static_cast<std::uint32_t>(s.nside));
  put<double>(o, s.mask.theta_max);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(n));
  for (std::int64_t p : s.mask.pixels) put<std::uint32_t>(o, static_cast<std::uint32_t>(p));
  for (const auto& v : s.values) {
    for (Eigen::Index k = 0; k < v.size(); ++k) put<double>(o, v[k]);
  }
  finish(o, path);
}

SignalStack read_signal_stack(const std::string& path) {
  auto i = open_in(path);
  expect_magic(i, "SLSG", "signal stack");
  if (get<std::uint16_t>(i, "version") != 1) throw io_error("signal stack: unknown version");
  const auto count = get<std::uint32_t>(i, "count");
  SignalStack s;
  s.nside = static_cast<int>(get<std::uint32_t>(i, "nside"));
  if (s.nside < 1 || (s.nside & (s.nside - 1)) != 0) throw io_error("signal stack: bad nside");
  const double theta = get<double>(i, "theta_max");
  const auto n = get<std::uint32_t>(i, "mask count");
  std::vector<std::int64_t> pixels(n);
  for (auto& p : pixels) p = get<std::uint32_t>(i, "mask pixel");
  s.mask = rebuild_mask(s.nside, theta, std::move(pixels));
  s.values.resize(count);
  for (auto& v : s.values) {
    v.resize(n);
    for (std::uint32_t k = 0; k < n; ++k) v[k] = get<double>(i, "signal value");
  }
  return s;
}

void write_fodf_stack(const std::string& path, const FodfStack& s) {
  require(s.nside >= 1 && s.l_max >= 0, "write_fodf_stack: bad header fields");
  require(!s.fodfs.empty(), "write_fodf_stack: empty stack");
  const Eigen::Index na = s.fodfs.front().weights.size();
  const Eigen::Index nc = s.fodfs.front().sh.size();
  for (const auto& f : s.fodfs) {
    require(f.weights.size() == na && f.sh.size() == nc, "write_fodf_stack: ragged stack");
  }
  auto o = open_out(path);
  put_magic(o, "FODF");
  put<std::uint16_t>(o, 1);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(s.fodfs.size()));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(s.nside));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(s.l_max));
  put<std::uint32_t>(o, static_cast<std::uint32_t>(na));
  put<std::uint32_t>(o, static_cast<std::uint32_t>(nc));
  for (const auto& f : s.fodfs) {
    for (Eigen::Index k = 0; k < na; ++k) put<double>(o, f.weights[k]);
    for (Eigen::Index k = 0; k < nc; ++k) put<double>(o, f.sh[k]);
  }
  finish(o, path);
}

FodfStack read_fodf_stack(const std::string& path) {
  auto i = open_in(path);
  expect_magic(i, "FODF", "fODF stack");
  if (get<std::uint16_t>(i, "version") != 1) throw io_error("fODF stack: unknown version");
  const auto count = get<std::uint32_t>(i, "count");
  FodfStack s;
  s.nside = get<std::uint16_t>(i, "nside");
  s.l_max = get<std::uint16_t>(i, "l_max");
  const auto na = get<std::uint32_t>(i, "atom count");
  const auto nc = get<std::uint32_t>(i, "coefficient count");
  s.fodfs.resize(count);
  for (auto& f : s.fodfs) {
    f.weights.resize(na);
    for (std::uint32_t k = 0; k < na; ++k) f.weights[k] = get<double>(i, "weight");
    f.sh.resize(nc);
    for (std::uint32_t k = 0; k < nc; ++k) f.sh[k] = get<double>(i, "sh coefficient");
  }
  return s;
}

void write_checkpoint(const std::string& path, const SphericalUNet& net) {
  auto o = open_out(path);
  put_magic(o, "SNET");
  put<std::uint16_t>(o, 1);
  put<std::uint64_t>(o, net.arch_hash());
  const NetSpec& s = net.spec();
  put<std::uint16_t>(o, static_cast<std::uint16_t>(s.nside_in));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(s.nside_fodf));
  for (int w : s.widths) put<std::uint16_t>(o, static_cast<std::uint16_t>(w));
  put<std::uint16_t>(o, static_cast<std::uint16_t>(s.cheb_order));
  put<double>(o, s.leaky_slope);
  const CapMask& m = net.input_mask();
  put<double>(o, m.theta_max);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(m.count()));
  for (std::int64_t p : m.pixels) put<std::uint32_t>(o, static_cast<std::uint32_t>(p));
  put<std::uint64_t>(o, static_cast<std::uint64_t>(net.n_params()));
  for (Eigen::Index k = 0; k < net.n_params(); ++k) put<double>(o, net.params()[k]);
  finish(o, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  auto i = open_in(path);
  expect_magic(i, "SNET", "checkpoint");
  if (get<std::uint16_t>(i, "version") != 1) throw io_error("checkpoint: unknown version");
  Checkpoint c;
  c.arch_hash = get<std::uint64_t>(i, "architecture hash");
  c.spec.nside_in = get<std::uint16_t>(i, "input nside");
  c.spec.nside_fodf = get<std::uint16_t>(i, "fodf nside");
  for (int& w : c.spec.widths) w = get<std::uint16_t>(i, "width");
  c.spec.cheb_order = get<std::uint16_t>(i, "filter order");
  c.spec.leaky_slope = get<double>(i, "slope");
  c.mask_theta_max = get<double>(i, "mask angle");
  const auto n = get<std::uint32_t>(i, "mask count");
  c.mask_pixels.resize(n);
  for (auto& p : c.mask_pixels) p = get<std::uint32_t>(i, "mask pixel");
  const auto np = get<std::uint64_t>(i, "parameter count");
  c.params.resize(static_cast<Eigen::Index>(np));
  for (std::uint64_t k = 0; k < np; ++k) {
    c.params[static_cast<Eigen::Index>(k)] = get<double>(i, "parameter");
  }
  return c;
}

SphericalUNet restore_net(const Checkpoint& c) {
  auto grid = std::make_shared<HealpixGrid>(c.spec.nside_in);
  CapMask mask = rebuild_mask(c.spec.nside_in, c.mask_theta_max, c.mask_pixels);
  SphericalUNet net(c.spec, grid, mask);
  if (net.arch_hash() != c.arch_hash) {
    throw io_error("checkpoint: architecture hash mismatch");
  }
  if (net.n_params() != c.params.size()) {
    throw io_error("checkpoint: parameter count mismatch");
  }
  net.params() = c.params;
  return net;
}

void write_kernel_bank(const std::string& path, const KernelBank& bank) {
  auto o = open_out(path);
  put_magic(o, "KBNK");
  put<std::uint16_t>(o, 1);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(bank.grid->nside()));
  put<double>(o, bank.mask.theta_max);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(bank.mask.count()));
  for (std::int64_t p : bank.mask.pixels) put<std::uint32_t>(o, static_cast<std::uint32_t>(p));
  put<std::uint32_t>(o, static_cast<std::uint32_t>(bank.directions.size()));
  put<double>(o, bank.params.alpha);
  put<double>(o, bank.params.sigma);
  put<double>(o, bank.params.centre.x());
  put<double>(o, bank.params.centre.y());
  put<double>(o, bank.params.centre.z());
  put<std::uint8_t>(o, bank.params.normalize ? 1 : 0);
  put<std::uint32_t>(o, static_cast<std::uint32_t>(bank.degenerate_columns));
  for (const FibreOrientation& d : bank.directions) {
    put<double>(o, d.phi);
    put<double>(o, d.theta);
  }
  for (Eigen::Index col = 0; col < bank.k.cols(); ++col) {
    for (Eigen::Index row = 0; row < bank.k.rows(); ++row) put<double>(o, bank.k(row, col));
  }
  finish(o, path);
}

KernelBank read_kernel_bank(const std::string& path) {
  auto i = open_in(path);
  expect_magic(i, "KBNK", "kernel bank");
  if (get<std::uint16_t>(i, "version") != 1) throw io_error("kernel bank: unknown version");
  KernelBank bank;
  const int nside = static_cast<int>(get<std::uint32_t>(i, "nside"));
  if (nside < 1 || (nside & (nside - 1)) != 0) throw io_error("kernel bank: bad nside");
  bank.grid = std::make_shared<HealpixGrid>(nside);
  const double theta = get<double>(i, "theta_max");
  const auto n = get<std::uint32_t>(i, "mask count");
  std::vector<std::int64_t> pixels(n);
  for (auto& p : pixels) p = get<std::uint32_t>(i, "mask pixel");
  bank.mask = rebuild_mask(nside, theta, std::move(pixels));
  const auto nd = get<std::uint32_t>(i, "direction count");
  bank.params.alpha = get<double>(i, "alpha");
  bank.params.sigma = get<double>(i, "sigma");
  bank.params.centre.x() = get<double>(i, "centre x");
  bank.params.centre.y() = get<double>(i, "centre y");
  bank.params.centre.z() = get<double>(i, "centre z");
  bank.params.normalize = get<std::uint8_t>(i, "normalize") != 0;
  bank.degenerate_columns = static_cast<int>(get<std::uint32_t>(i, "degenerate count"));
  bank.directions.resize(nd);
  for (auto& d : bank.directions) {
    d.phi = get<double>(i, "direction phi");
    d.theta = get<double>(i, "direction theta");
  }
  bank.k.resize(n, nd);
  for (std::uint32_t col = 0; col < nd; ++col) {
    for (std::uint32_t row = 0; row < n; ++row) bank.k(row, col) = get<double>(i, "bank value");
  }
  return bank;
}

}  // namespace sliodf
