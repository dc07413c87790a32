#include "chemclip/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "chemclip/csv.hpp"
#include "chemclip/error.hpp"
#include "chemclip/rng.hpp"

namespace chemclip {
namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr std::size_t kPowerMaxIterations = 20000;

std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

// Two Gram-Schmidt passes: one pass leaves a residual along the basis of the
// order of rounding in the input, which matters when the input is itself
// mostly rounding noise.
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const double proj = dot(v, b);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * b[k];
    }
  }
}

bool normalize(std::vector<double>& v) {
  const double n = std::sqrt(squared_norm(v));
  if (n < 1e-300) return false;
  for (double& x : v) x /= n;
  return true;
}

// Leading eigenvector of a symmetric PSD matrix, restricted to the
// orthogonal complement of `found`.
std::vector<double> power_iteration(const Matrix& cov, const std::vector<std::vector<double>>& found,
                                    std::uint64_t seed) {
  const std::size_t d = cov.rows();
  SplitMix64 rng(seed);
  std::vector<double> v(d);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  orthogonalize(v, found);
  if (!normalize(v)) return v;
  // Below this the remaining eigenvalues are zero up to rounding and any unit
  // vector in the complement is as good as another.
  double scale = 0.0;
  for (std::size_t k = 0; k < d; ++k) scale = std::max(scale, cov(k, k));
  const double negligible = 1e-12 * scale;
  for (std::size_t it = 0; it < kPowerMaxIterations; ++it) {
    std::vector<double> next = multiply(cov, v);
    orthogonalize(next, found);
    if (std::sqrt(squared_norm(next)) <= negligible) break;
    if (!normalize(next)) return std::vector<double>(d, 0.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < d; ++k) diff = std::max(diff, std::abs(next[k] - v[k]));
    v = std::move(next);
    if (diff < kPowerTolerance) break;
  }
  return v;
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (std::abs(v[k]) > std::abs(v[arg]) + 1e-12) arg = k;
  }
  if (!v.empty() && v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

}  // namespace

Projection2D pca_2d(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  Projection2D proj;
  proj.method = ProjectionMethod::kPca;
  proj.coordinates = Matrix(n, 2);
  if (n == 0 || d == 0) return proj;

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += data(i, k);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centered = data;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) centered(i, k) -= mean[k];
  }
  Matrix cov = matmul_transpose_a(centered, centered);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (double& v : cov.values()) v /= denom;

  std::vector<std::vector<double>> axes;
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<double> v = axis < static_cast<int>(d) ? power_iteration(cov, axes, 0x9CA0 + axis)
                                                       : std::vector<double>(d, 0.0);
    fix_sign(v);
    axes.push_back(v);
  }
  for (std::size_t i = 0; i < n; ++i) {
    proj.coordinates(i, 0) = dot(centered.row(i), axes[0]);
    proj.coordinates(i, 1) = dot(centered.row(i), axes[1]);
  }
  return proj;
}

Matrix conditional_affinities(const Matrix& sq, double perplexity) {
  const std::size_t n = sq.rows();
  const double target = std::log(perplexity);
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    auto row = p.row(i);
    for (int iter = 0; iter < 50; ++iter) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * sq(i, j));
        sum += row[j];
      }
      if (sum <= std::numeric_limits<double>::min()) sum = std::numeric_limits<double>::min();
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j) h += beta * sq(i, j) * row[j];
      h = h / sum + std::log(sum);
      for (double& v : row) v /= sum;
      const double diff = h - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : 0.5 * (beta + lo);
      }
    }
  }
  return p;
}

namespace {

double kl_divergence(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  double qsum = 0.0;
  Matrix num(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
      num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
      qsum += num(i, j);
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(num(i, j) / qsum, std::numeric_limits<double>::min());
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

}  // namespace

TsneResult tsne_2d(const Matrix& data, const TsneParams& params) {
  const std::size_t n = data.rows();
  if (!(params.perplexity > 0.0) || static_cast<double>(n) <= 3.0 * params.perplexity) {
    throw Error(ErrorCode::kPerplexityTooLarge, "t-SNE needs more than 3 * perplexity points (n = " +
                                                    std::to_string(n) + ", perplexity = " +
                                                    std::to_string(params.perplexity) + ")");
  }
  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < data.cols(); ++k) {
        const double d = data(i, k) - data(j, k);
        s += d * d;
      }
      sq(i, j) = sq(j, i) = s;
    }
  }
  const Matrix cond = conditional_affinities(sq, params.perplexity);
  Matrix p(n, n);
  double psum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = cond(i, j) + cond(j, i);
      psum += p(i, j);
    }
  }
  for (double& v : p.values()) v /= psum;

  SplitMix64 rng(params.seed);
  Matrix y(n, 2);
  for (double& v : y.values()) v = 1e-4 * rng.normal();
  Matrix update(n, 2), gains(n, 2, 1.0), grad(n, 2), num(n, n);

  TsneResult result;
  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration = iter < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum = iter < params.momentum_switch ? params.initial_momentum : params.final_momentum;

    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          num(i, j) = 0.0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        qsum += num(i, j);
      }
    }
    grad.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double mult = (exaggeration * p(i, j) - num(i, j) / qsum) * num(i, j);
        grad(i, 0) += 4.0 * mult * (y(i, 0) - y(j, 0));
        grad(i, 1) += 4.0 * mult * (y(i, 1) - y(j, 1));
      }
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      double& g = gains.values()[k];
      const double dg = grad.values()[k];
      double& u = update.values()[k];
      g = ((dg > 0.0) != (u > 0.0)) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      u = momentum * u - params.learning_rate * g * dg;
      y.values()[k] += u;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
    }
    if (iter == 0) result.initial_kl = kl_divergence(p, y);
  }
  result.final_kl = kl_divergence(p, y);
  result.projection.coordinates = std::move(y);
  result.projection.method = ProjectionMethod::kTsne;
  result.projection.perplexity = params.perplexity;
  result.projection.iterations = params.iterations;
  result.projection.seed = params.seed;
  return result;
}

namespace {

struct Style {
  const char* fill;
  const char* label;
};

// inorganic active, inorganic inactive, organic active, organic inactive
constexpr Style kStyles[4] = {{"#b2182b", "Inorganic active"},
                              {"#f4a582", "Inorganic inactive"},
                              {"#2166ac", "Organic active"},
                              {"#92c5de", "Organic inactive"}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string glyph(bool square, double x, double y, const char* fill) {
  if (square) {
    return "<rect x=\"" + fmt(x - 3.5) + "\" y=\"" + fmt(y - 3.5) + "\" width=\"7\" height=\"7\" fill=\"" + fill +
           "\" stroke=\"#333333\" stroke-width=\"0.3\"/>\n";
  }
  return "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"3.5\" fill=\"" + fill +
         "\" stroke=\"#333333\" stroke-width=\"0.3\"/>\n";
}

}  // namespace

std::string render_scatter_svg(const Projection2D& projection, std::span<const Domain> domains,
                               std::span<const bool> active, const std::string& title) {
  const Matrix& c = projection.coordinates;
  if (domains.size() != c.rows() || active.size() != c.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not match projected points");
  }
  constexpr double kWidth = 720, kHeight = 560, kMargin = 40, kLegend = 170;
  const double plot_w = kWidth - 2 * kMargin - kLegend;
  const double plot_h = kHeight - 2 * kMargin;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (c.rows() > 0) {
    xmin = xmax = c(0, 0);
    ymin = ymax = c(0, 1);
    for (std::size_t i = 1; i < c.rows(); ++i) {
      xmin = std::min(xmin, c(i, 0));
      xmax = std::max(xmax, c(i, 0));
      ymin = std::min(ymin, c(i, 1));
      ymax = std::max(ymax, c(i, 1));
    }
  }
  const double xr = xmax - xmin > 0 ? xmax - xmin : 1.0;
  const double yr = ymax - ymin > 0 ? ymax - ymin : 1.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n";
  }
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << fmt(plot_w) << "\" height=\""
      << fmt(plot_h) << "\" fill=\"none\" stroke=\"#999999\"/>\n";
  svg << "<g id=\"points\">\n";
  for (std::size_t i = 0; i < c.rows(); ++i) {
    const double x = kMargin + (c(i, 0) - xmin) / xr * plot_w;
    const double y = kMargin + plot_h - (c(i, 1) - ymin) / yr * plot_h;
    const bool inorganic = domains[i] == Domain::kInorganic;
    const std::size_t style = (inorganic ? 0 : 2) + (active[i] ? 0 : 1);
    svg << glyph(inorganic, x, y, kStyles[style].fill);
  }
  svg << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  const double lx = kWidth - kLegend - kMargin / 2;
  for (std::size_t s = 0; s < 4; ++s) {
    const double ly = kMargin + 10 + 22.0 * static_cast<double>(s);
    svg << glyph(s < 2, lx + 8, ly, kStyles[s].fill);
    svg << "<text x=\"" << fmt(lx + 20) << "\" y=\"" << fmt(ly + 4) << "\">" << kStyles[s].label << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void write_projection_csv(const std::filesystem::path& path, const Projection2D& projection,
                          const EmbeddingTable& table) {
  if (table.meta.size() != projection.coordinates.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection rows do not match embedding table");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  csv::write_row(out, {"record_id", "x", "y", "domain", "active"});
  for (std::size_t i = 0; i < table.meta.size(); ++i) {
    const auto& m = table.meta[i];
    csv::write_row(out, {m.record_id, csv::format_double(projection.coordinates(i, 0)),
                         csv::format_double(projection.coordinates(i, 1)), std::string(domain_name(m.domain)),
                         m.active ? "1" : "0"});
  }
}

}  // namespace chemclip
