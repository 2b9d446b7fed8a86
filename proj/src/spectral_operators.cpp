#include "mbm/spectral_operators.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mbm/parallel.hpp"

namespace mbm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::domain_error("Hurst index " + std::to_string(H) + " outside (0, 1)");
}

// sin(x)/x, with the removable singularity at 0.
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

// pi cot(pi u) - 1/u, finite at u = 0.
double cot_minus_pole(double u) {
  if (std::abs(u) < 1e-3) {
    const double p2 = kPi * kPi, u2 = u * u;
    return -u * (p2 / 3.0 + u2 * (p2 * p2 / 45.0 + u2 * 2.0 * p2 * p2 * p2 / 945.0));
  }
  return kPi / std::tan(kPi * u) - 1.0 / u;
}

// Points per batch GEMM. Fixed so results are independent of the worker count.
constexpr std::size_t kBlock = 32;

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double c_of_H(double H) {
  check_hurst(H);
  // cos(pi H) / (1 - 2H) = (pi/2) sinc(pi (1/2 - H))
  const double c2 = kPi * std::tgamma(2.0 - 2.0 * H) * sinc(kPi * (0.5 - H)) / H;
  return std::sqrt(c2);
}

double beta_of_H(double H) {
  check_hurst(H);
  // d/dH of (1/2)[log pi + log Gamma(2-2H) + log sinc(pi(1/2-H)) - log H]
  const double u = 0.5 - H;
  return -digamma(2.0 - 2.0 * H) - 0.5 * cot_minus_pole(u) - 0.5 / H;
}

// ---------------------------------------------------------------------------

SpectralOperators::SpectralOperators(HermiteBasis basis, SpectralOptions options)
    : basis_(std::move(basis)), options_(options) {
  if (!(options_.max_time > 0.0)) throw std::invalid_argument("SpectralOptions: max_time must be positive");
  const int K = basis_.size();
  const double T = basis_.domain();
  const double inner = 0.25;
  int order = options_.panel_order;
  if (order <= 0) order = static_cast<int>(std::ceil((std::sqrt(2.0 * K + 1.0) + options_.max_time) / 2.0)) + 12;

  std::vector<QuadratureRule> parts;
  parts.push_back(graded_gauss_legendre(inner, options_.graded_ratio, options_.graded_levels, options_.graded_order));
  parts.push_back(composite_gauss_legendre(inner, std::max(T, 1.0), 1.0, order));
  const QuadratureRule rule = concatenate(parts);
  nodes_ = rule.nodes;
  weights_ = rule.weights;
  log_nodes_ = nodes_.array().log().matrix();

  const Eigen::MatrixXd all =
      basis_.values(std::span<const double>(nodes_.data(), static_cast<std::size_t>(nodes_.size())));
  const int n_even = (K + 1) / 2, n_odd = K / 2;
  even_rows_.resize(n_even, nodes_.size());
  odd_rows_.resize(n_odd, nodes_.size());
  for (int k = 0; k < K; ++k) {
    if (k % 2 == 0)
      even_rows_.row(k / 2) = all.row(k);
    else
      odd_rows_.row(k / 2) = all.row(k);
  }
}

void SpectralOperators::check_point(double H, double t) const {
  check_hurst(H);
  if (!std::isfinite(t) || std::abs(t) > options_.max_time * (1.0 + 1e-12))
    throw std::out_of_range("time " + std::to_string(t) + " outside [-" + std::to_string(options_.max_time) + ", " +
                            std::to_string(options_.max_time) + "]");
}

OperatorColumns SpectralOperators::evaluate(std::span<const SpectralPoint> points, unsigned quantities,
                                            int workers) const {
  for (const auto& p : points) check_point(p.hurst, p.time);
  const int K = size();
  const auto n = static_cast<Eigen::Index>(points.size());
  const std::array<Quantity, 4> all_q{kM, kDM, kCumM, kCumDM};
  std::vector<Quantity> wanted;
  for (Quantity q : all_q)
    if (quantities & q) wanted.push_back(q);
  const auto nq = static_cast<Eigen::Index>(wanted.size());

  OperatorColumns out;
  std::array<Eigen::MatrixXd*, 4> targets{&out.m, &out.dm, &out.cum_m, &out.cum_dm};
  for (std::size_t i = 0; i < all_q.size(); ++i)
    if (quantities & all_q[i]) targets[i]->resize(K, n);
  if (n == 0 || nq == 0) return out;

  const Eigen::Index nodes = nodes_.size();
  const std::size_t blocks = (points.size() + kBlock - 1) / kBlock;

  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t first = b * kBlock;
    const std::size_t count = std::min(kBlock, points.size() - first);
    const auto cols = static_cast<Eigen::Index>(count) * nq;
    Eigen::MatrixXd w_even(nodes, cols), w_odd(nodes, cols);
    Eigen::ArrayXd ya(nodes), tcos(nodes), tsin(nodes), half_sin(nodes), log_factor(nodes);
    std::vector<double> scales(count);

    for (std::size_t p = 0; p < count; ++p) {
      const double H = points[first + p].hurst, t = points[first + p].time;
      const double a = 0.5 - H;
      const double beta = beta_of_H(H);
      scales[p] = 2.0 / c_of_H(H);
      ya = (a * log_nodes_.array()).exp() * weights_.array();
      tcos = (t * nodes_.array()).cos();
      tsin = (t * nodes_.array()).sin();
      half_sin = (0.5 * t * nodes_.array()).sin();
      log_factor = -(beta + log_nodes_.array());
      for (Eigen::Index j = 0; j < nq; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(p) * nq + j;
        switch (wanted[j]) {
          case kM:
            w_even.col(c) = (ya * tcos).matrix();
            w_odd.col(c) = (ya * tsin).matrix();
            break;
          case kDM:
            w_even.col(c) = (ya * tcos * log_factor).matrix();
            w_odd.col(c) = (ya * tsin * log_factor).matrix();
            break;
          case kCumM:
            w_even.col(c) = (ya * tsin / nodes_.array()).matrix();
            w_odd.col(c) = (ya * 2.0 * half_sin.square() / nodes_.array()).matrix();
            break;
          case kCumDM:
            w_even.col(c) = (ya * tsin / nodes_.array() * log_factor).matrix();
            w_odd.col(c) = (ya * 2.0 * half_sin.square() / nodes_.array() * log_factor).matrix();
            break;
          default:
            break;
        }
      }
    }
    const Eigen::MatrixXd r_even = even_rows_ * w_even;
    const Eigen::MatrixXd r_odd = odd_rows_ * w_odd;
    for (std::size_t p = 0; p < count; ++p) {
      const auto col = static_cast<Eigen::Index>(first + p);
      for (Eigen::Index j = 0; j < nq; ++j) {
        const Eigen::Index c = static_cast<Eigen::Index>(p) * nq + j;
        Eigen::MatrixXd& target = *targets[std::countr_zero(static_cast<unsigned>(wanted[j]))];
        for (int k = 0; k < K; ++k) {
          const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
          const double v = (k % 2 == 0) ? r_even(k / 2, c) : r_odd(k / 2, c);
          target(k, col) = sign * scales[p] * v;
        }
      }
    }
  });
  return out;
}

double SpectralOperators::single(int k, double H, double t, Quantity q) const {
  if (k < 0 || k >= size()) throw std::invalid_argument("operator index " + std::to_string(k) + " out of range");
  const SpectralPoint p{H, t};
  const OperatorColumns c = evaluate(std::span<const SpectralPoint>(&p, 1), q);
  switch (q) {
    case kM: return c.m(k, 0);
    case kDM: return c.dm(k, 0);
    case kCumM: return c.cum_m(k, 0);
    default: return c.cum_dm(k, 0);
  }
}

double SpectralOperators::apply_M(int k, double H, double t) const { return single(k, H, t, kM); }
double SpectralOperators::apply_dM(int k, double H, double t) const { return single(k, H, t, kDM); }
double SpectralOperators::cumulative_M(int k, double H, double t) const { return single(k, H, t, kCumM); }
double SpectralOperators::cumulative_dM(int k, double H, double t) const { return single(k, H, t, kCumDM); }

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kMagic{'M', 'B', 'M', 'O', 'P', 'T', 'B', 'L'};

struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
      bytes(&b, 1);
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}
void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 4);
}
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw std::runtime_error("operator table: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw std::runtime_error("operator table: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void check_grid(const std::vector<double>& g, double lo, double hi, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= lo && g[i] <= hi)) throw std::invalid_argument(std::string(name) + " grid value out of range");
    if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
  }
}

}  // namespace

std::uint64_t OperatorTable::content_hash(const SpectralOperators& ops, std::span<const double> hurst_grid,
                                          std::span<const double> time_grid) {
  Fnv1a h;
  h.u64(kFormatVersion);
  h.u64(static_cast<std::uint64_t>(ops.size()));
  h.f64(ops.basis().domain());
  const auto& o = ops.options();
  h.f64(o.max_time);
  h.f64(o.graded_ratio);
  h.u64(static_cast<std::uint64_t>(o.graded_levels));
  h.u64(static_cast<std::uint64_t>(o.graded_order));
  h.u64(static_cast<std::uint64_t>(o.panel_order));
  h.u64(hurst_grid.size());
  for (double v : hurst_grid) h.f64(v);
  h.u64(time_grid.size());
  for (double v : time_grid) h.f64(v);
  return h.state;
}

OperatorTable::OperatorTable(std::shared_ptr<const SpectralOperators> ops, std::vector<double> hurst_grid,
                             std::vector<double> time_grid, int workers)
    : ops_(std::move(ops)), hurst_(std::move(hurst_grid)), time_(std::move(time_grid)) {
  check_grid(hurst_, 1e-12, 1.0 - 1e-12, "Hurst");
  check_grid(time_, 0.0, std::min(1.0, ops_->options().max_time), "time");
  hash_ = content_hash(*ops_, hurst_, time_);
  std::vector<SpectralPoint> pts;
  pts.reserve(hurst_.size() * time_.size());
  for (double H : hurst_)
    for (double t : time_) pts.push_back({H, t});
  OperatorColumns c = ops_->evaluate(pts, kAllQuantities, workers);
  m_ = std::move(c.m);
  dm_ = std::move(c.dm);
  cum_m_ = std::move(c.cum_m);
  cum_dm_ = std::move(c.cum_dm);
}

std::filesystem::path OperatorTable::cache_path(const std::filesystem::path& dir, std::uint64_t hash) {
  std::ostringstream name;
  name << "operator_table_" << std::hex << std::setw(16) << std::setfill('0') << hash << ".bin";
  return dir / name.str();
}

void OperatorTable::save(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kFormatVersion);
  put_u64(os, hash_);
  put_u32(os, static_cast<std::uint32_t>(size()));
  put_f64(os, ops_->basis().domain());
  put_f64(os, ops_->options().max_time);
  put_u32(os, static_cast<std::uint32_t>(hurst_.size()));
  put_u32(os, static_cast<std::uint32_t>(time_.size()));
  for (double v : hurst_) put_f64(os, v);
  for (double v : time_) put_f64(os, v);
  for (const Eigen::MatrixXd* m : {&m_, &dm_, &cum_m_, &cum_dm_})
    for (Eigen::Index j = 0; j < m->cols(); ++j)
      for (Eigen::Index k = 0; k < m->rows(); ++k) put_f64(os, (*m)(k, j));
  if (!os) throw std::runtime_error("error writing " + file.string());
}

OperatorTable OperatorTable::load(const std::filesystem::path& file, std::shared_ptr<const SpectralOperators> ops,
                                  std::vector<double> hurst_grid, std::vector<double> time_grid) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error(file.string() + ": not an operator table");
  if (get_u32(is) != kFormatVersion) throw std::runtime_error(file.string() + ": unsupported format version");
  const std::uint64_t expected = content_hash(*ops, hurst_grid, time_grid);
  if (get_u64(is) != expected) throw std::runtime_error(file.string() + ": configuration hash mismatch");
  const auto K = get_u32(is);
  const double domain = get_f64(is), max_time = get_f64(is);
  const auto nh = get_u32(is), nt = get_u32(is);
  if (static_cast<int>(K) != ops->size() || domain != ops->basis().domain() || max_time != ops->options().max_time ||
      nh != hurst_grid.size() || nt != time_grid.size())
    throw std::runtime_error(file.string() + ": header does not match configuration");
  for (double v : hurst_grid)
    if (get_f64(is) != v) throw std::runtime_error(file.string() + ": Hurst grid mismatch");
  for (double v : time_grid)
    if (get_f64(is) != v) throw std::runtime_error(file.string() + ": time grid mismatch");

  OperatorTable table;
  table.ops_ = std::move(ops);
  table.hurst_ = std::move(hurst_grid);
  table.time_ = std::move(time_grid);
  table.hash_ = expected;
  const auto cols = static_cast<Eigen::Index>(nh) * nt;
  for (Eigen::MatrixXd* m : {&table.m_, &table.dm_, &table.cum_m_, &table.cum_dm_}) {
    m->resize(K, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(K); ++k) (*m)(k, j) = get_f64(is);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error(file.string() + ": trailing bytes");
  return table;
}

OperatorTable OperatorTable::load_or_build(const std::filesystem::path& dir,
                                           std::shared_ptr<const SpectralOperators> ops,
                                           std::vector<double> hurst_grid, std::vector<double> time_grid, bool force,
                                           int workers, bool* built) {
  const auto file = cache_path(dir, content_hash(*ops, hurst_grid, time_grid));
  if (!force && std::filesystem::exists(file)) {
    try {
      OperatorTable t = load(file, ops, hurst_grid, time_grid);
      if (built) *built = false;
      return t;
    } catch (const std::runtime_error&) {
      // stale or corrupt cache: rebuild below
    }
  }
  OperatorTable t(std::move(ops), std::move(hurst_grid), std::move(time_grid), workers);
  std::filesystem::create_directories(dir);
  t.save(file);
  if (built) *built = true;
  return t;
}

void OperatorTable::check_range(double H, double t) const {
  if (!(H >= hurst_.front() && H <= hurst_.back()))
    throw std::out_of_range("Hurst value " + std::to_string(H) + " outside the table grid [" +
                            std::to_string(hurst_.front()) + ", " + std::to_string(hurst_.back()) + "]");
  if (!(t >= time_.front() && t <= time_.back()))
    throw std::out_of_range("time " + std::to_string(t) + " outside the table grid [" + std::to_string(time_.front()) +
                            ", " + std::to_string(time_.back()) + "]");
}

const Eigen::MatrixXd& OperatorTable::storage(Quantity q) const {
  switch (q) {
    case kM: return m_;
    case kDM: return dm_;
    case kCumM: return cum_m_;
    case kCumDM: return cum_dm_;
    default: throw std::invalid_argument("storage: single quantity expected");
  }
}

double OperatorTable::cached(Quantity q, int k, std::size_t ih, std::size_t it) const {
  if (ih >= hurst_.size() || it >= time_.size()) throw std::out_of_range("grid index out of range");
  return storage(q)(k, static_cast<Eigen::Index>(ih * time_.size() + it));
}

std::optional<std::size_t> OperatorTable::grid_column(double H, double t) const {
  const auto ih = std::lower_bound(hurst_.begin(), hurst_.end(), H);
  if (ih == hurst_.end() || *ih != H) return std::nullopt;
  const auto it = std::lower_bound(time_.begin(), time_.end(), t);
  if (it == time_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(ih - hurst_.begin()) * time_.size() + static_cast<std::size_t>(it - time_.begin());
}

double OperatorTable::point(int k, double H, double t, Quantity q) const {
  if (k < 0 || k >= size()) throw std::invalid_argument("operator index " + std::to_string(k) + " out of range");
  check_range(H, t);
  if (const auto col = grid_column(H, t)) return storage(q)(k, static_cast<Eigen::Index>(*col));
  switch (q) {
    case kM: return ops_->apply_M(k, H, t);
    case kDM: return ops_->apply_dM(k, H, t);
    case kCumM: return ops_->cumulative_M(k, H, t);
    default: return ops_->cumulative_dM(k, H, t);
  }
}

double OperatorTable::apply_M(int k, double H, double t) const { return point(k, H, t, kM); }
double OperatorTable::apply_dM(int k, double H, double t) const { return point(k, H, t, kDM); }
double OperatorTable::cumulative_M(int k, double H, double t) const { return point(k, H, t, kCumM); }
double OperatorTable::cumulative_dM(int k, double H, double t) const { return point(k, H, t, kCumDM); }

OperatorColumns OperatorTable::columns(std::span<const SpectralPoint> points, unsigned quantities,
                                       int workers) const {
  std::vector<SpectralPoint> misses;
  std::vector<std::size_t> miss_pos;
  std::vector<std::optional<std::size_t>> hit(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_range(points[i].hurst, points[i].time);
    hit[i] = grid_column(points[i].hurst, points[i].time);
    if (!hit[i]) {
      misses.push_back(points[i]);
      miss_pos.push_back(i);
    }
  }
  OperatorColumns direct = ops_->evaluate(misses, quantities, workers);
  OperatorColumns out;
  const auto n = static_cast<Eigen::Index>(points.size());
  const std::array<std::pair<Quantity, Eigen::MatrixXd*>, 4> parts{
      {{kM, &out.m}, {kDM, &out.dm}, {kCumM, &out.cum_m}, {kCumDM, &out.cum_dm}}};
  const std::array<const Eigen::MatrixXd*, 4> computed{&direct.m, &direct.dm, &direct.cum_m, &direct.cum_dm};
  for (std::size_t qi = 0; qi < parts.size(); ++qi) {
    const auto [q, target] = parts[qi];
    if (!(quantities & q)) continue;
    target->resize(size(), n);
    for (std::size_t i = 0; i < points.size(); ++i)
      if (hit[i]) target->col(static_cast<Eigen::Index>(i)) = storage(q).col(static_cast<Eigen::Index>(*hit[i]));
    for (std::size_t j = 0; j < miss_pos.size(); ++j)
      target->col(static_cast<Eigen::Index>(miss_pos[j])) = computed[qi]->col(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace mbm
