#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "xstable/discrete_measure.hpp"
#include "xstable/errors.hpp"
#include "xstable/index_set.hpp"
#include "xstable/point.hpp"

namespace xstable {

// Stateless counter-based generator: every draw is a hash of
// (seed, stream, counter) through the splitmix64 finaliser, so substreams
// can be consumed in any order, in parallel, with identical results.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t h = mix(seed_);
    h = mix(h ^ (stream + 0xD1B54A32D192ED03ull));
    h = mix(h ^ (counter + 0x8CB92BA72F3D8DD7ull));
    return h;
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform_open(std::uint64_t stream, std::uint64_t counter) const {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// -1/log(U) is standard Frechet for uniform U.
inline double frechet_from_uniform(double u) { return -1.0 / std::log(u); }

// Row-major sample matrix with provenance.
struct SampleBatch {
  int dimension = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string model_id;
  std::vector<double> data;  // count x dimension

  double at(std::size_t row, int col) const { return data[row * static_cast<std::size_t>(dimension) + static_cast<std::size_t>(col)]; }
};

// Exact sampler for the max-linear law of a discrete angular measure:
// component i of sample s is max over atoms k of weight_k w_{k,i} Z_{s,k}
// with independent standard Frechet factors Z. Factor (s, k) consumes the
// substream (stream = s, counter = k), so the batch is reproducible and
// order-independent.
inline SampleBatch simulate_max_linear(const DiscreteSpectralMeasure& measure, std::size_t count,
                                       std::uint64_t seed, const std::string& model_id = "") {
  if (count == 0) throw DomainError("simulate_max_linear: need at least one sample");
  const int dim = measure.dimension();
  SampleBatch batch;
  batch.dimension = dim;
  batch.count = count;
  batch.seed = seed;
  batch.model_id = model_id;
  batch.data.assign(count * static_cast<std::size_t>(dim), 0.0);
  const CounterRng rng(seed);
  const auto& atoms = measure.atoms();
  for (std::size_t s = 0; s < count; ++s) {
    double* row = batch.data.data() + s * static_cast<std::size_t>(dim);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double z = frechet_from_uniform(rng.uniform_open(s, k));
      const double wz = atoms[k].weight * z;
      for (int i = 0; i < dim; ++i) {
        const double v = wz * atoms[k].direction[static_cast<std::size_t>(i)];
        if (v > row[i]) row[i] = v;
      }
    }
  }
  return batch;
}

// Empirical P(X_i <= x_i for i in S).
inline double ecdf(const SampleBatch& batch, IndexSet s, const EvaluationPoint& x) {
  if (s.empty()) throw StructuralError("ecdf: empty index set");
  if (!s.subset_of(IndexSet::full(batch.dimension)))
    throw StructuralError("ecdf: set outside the sample dimension");
  if (!s.subset_of(x.support())) throw StructuralError("ecdf: point does not cover the set");
  std::size_t hits = 0;
  for (std::size_t row = 0; row < batch.count; ++row) {
    bool all = true;
    for_each_member(s, [&](int i) { all = all && batch.at(row, i) <= x[i]; });
    hits += all ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.count);
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Empirical chi_{A,B}(x) = log p_AB - log p_A - log p_B from joint ECDF
// probabilities, with a delta-method standard error accounting for the
// covariances of the three indicators.
inline Estimate empirical_chi(const SampleBatch& batch, IndexSet a, IndexSet b,
                              const EvaluationPoint& x) {
  if (a.empty() || b.empty()) throw StructuralError("empirical_chi: empty index set");
  if (a.intersects(b)) throw StructuralError("empirical_chi: sets overlap");
  const double pa = ecdf(batch, a, x);
  const double pb = ecdf(batch, b, x);
  const double pab = ecdf(batch, a | b, x);
  if (!(pa > 0.0 && pa < 1.0 && pb > 0.0 && pb < 1.0 && pab > 0.0 && pab < 1.0))
    throw DomainError("empirical_chi: probe point outside the resolvable sample range");
  Estimate out;
  out.value = std::log(pab) - std::log(pa) - std::log(pb);
  const double var_term = (1.0 - pab) / pab + 2.0 * (pab - pa * pb) / (pa * pb) -
                          (1.0 - pa) / pa - (1.0 - pb) / pb;
  out.se = std::sqrt(std::max(var_term, 0.0) / static_cast<double>(batch.count));
  return out;
}

// One weighted draw from an angular-measure sampler.
struct WeightedDirection {
  double weight = 0.0;
  std::array<double, IndexSet::max_size> direction{};
};

// Samplers hand out independent weighted directions addressed by draw
// index; E[weight * f(direction)] must equal the angular integral of f.
template <class S>
concept spectral_sampler = requires(const S& s, std::uint64_t seed, std::uint64_t index) {
  { s.dimension() } -> std::convertible_to<int>;
  { s.draw(seed, index) } -> std::convertible_to<WeightedDirection>;
};

// Resamples the atoms of a discrete measure proportionally to their
// weights; the compensating importance weight is the total mass.
class DiscreteResampler {
 public:
  explicit DiscreteResampler(const DiscreteSpectralMeasure& m) : measure_(m) {
    for (const auto& atom : m.atoms()) {
      total_ += atom.weight;
      cumulative_.push_back(total_);
    }
  }

  int dimension() const { return measure_.dimension(); }

  WeightedDirection draw(std::uint64_t seed, std::uint64_t index) const {
    const CounterRng rng(seed);
    const double u = rng.uniform_open(index, 0) * total_;
    std::size_t k = 0;
    while (k + 1 < cumulative_.size() && u > cumulative_[k]) ++k;
    WeightedDirection out;
    out.weight = total_;
    const auto& dir = measure_.atoms()[k].direction;
    for (int i = 0; i < dimension(); ++i) out.direction[static_cast<std::size_t>(i)] = dir[static_cast<std::size_t>(i)];
    return out;
  }

 private:
  DiscreteSpectralMeasure measure_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

// Symmetric Dirichlet directions with integer concentration, built from
// sums of exponentials so draws stay counter-addressable. The importance
// weight is the dimension, matching the standard-margin normalisation.
class DirichletSampler {
 public:
  DirichletSampler(int dimension, int concentration) : dim_(dimension), conc_(concentration) {
    if (dimension < 1 || dimension > IndexSet::max_size)
      throw DomainError("DirichletSampler: dimension out of range");
    if (concentration < 1 || concentration > 64)
      throw DomainError("DirichletSampler: concentration must be a small positive integer");
  }

  int dimension() const { return dim_; }

  WeightedDirection draw(std::uint64_t seed, std::uint64_t index) const {
    const CounterRng rng(seed);
    WeightedDirection out;
    double total = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double g = 0.0;
      for (int j = 0; j < conc_; ++j) {
        const std::uint64_t counter = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(conc_) + static_cast<std::uint64_t>(j);
        g -= std::log(rng.uniform_open(index, counter));
      }
      out.direction[static_cast<std::size_t>(i)] = g;
      total += g;
    }
    for (int i = 0; i < dim_; ++i) out.direction[static_cast<std::size_t>(i)] /= total;
    out.weight = static_cast<double>(dim_);
    return out;
  }

 private:
  int dim_;
  int conc_;
};

struct SamplerValidation {
  std::vector<double> coordinate_means;
  std::vector<double> coordinate_se;
  double worst_sigma = 0.0;  // largest |mean - 1| / se
  bool pass = false;
};

// Checks the standard-margin moment identity E[weight * direction_i] = 1
// for every coordinate, at three standard errors.
template <spectral_sampler S>
SamplerValidation validate_sampler(const S& sampler, std::size_t count, std::uint64_t seed) {
  if (count < 2) throw DomainError("validate_sampler: need at least two draws");
  const int dim = sampler.dimension();
  std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> m2(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const WeightedDirection wd = sampler.draw(seed, idx);
    for (int i = 0; i < dim; ++i) {
      const double v = wd.weight * wd.direction[static_cast<std::size_t>(i)];
      const double delta = v - mean[static_cast<std::size_t>(i)];
      mean[static_cast<std::size_t>(i)] += delta / static_cast<double>(idx + 1);
      m2[static_cast<std::size_t>(i)] += delta * (v - mean[static_cast<std::size_t>(i)]);
    }
  }
  SamplerValidation out;
  out.coordinate_means = mean;
  out.coordinate_se.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    const double var = m2[static_cast<std::size_t>(i)] / static_cast<double>(count - 1);
    const double se = std::sqrt(var / static_cast<double>(count));
    out.coordinate_se[static_cast<std::size_t>(i)] = se;
    const double sigma = se > 0.0 ? std::fabs(mean[static_cast<std::size_t>(i)] - 1.0) / se
                                  : (mean[static_cast<std::size_t>(i)] == 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out.worst_sigma = std::max(out.worst_sigma, sigma);
  }
  out.pass = out.worst_sigma <= 3.0;
  return out;
}

struct CoefficientEstimates {
  Estimate d;
  Estimate chi;
  SamplerValidation moments;
};

namespace detail {

template <class Integrand>
CoefficientEstimates mc_accumulate(std::size_t count, Integrand&& integrand,
                                   SamplerValidation moments) {
  CoefficientEstimates out;
  out.moments = std::move(moments);
  double mean_d = 0, m2_d = 0, mean_c = 0, m2_c = 0;
  for (std::size_t idx = 0; idx < count; ++idx) {
    const auto [vd, vc] = integrand(idx);
    double delta = vd - mean_d;
    mean_d += delta / static_cast<double>(idx + 1);
    m2_d += delta * (vd - mean_d);
    delta = vc - mean_c;
    mean_c += delta / static_cast<double>(idx + 1);
    m2_c += delta * (vc - mean_c);
  }
  out.d.value = mean_d;
  out.d.se = std::sqrt(m2_d / static_cast<double>(count - 1) / static_cast<double>(count));
  out.chi.value = mean_c;
  out.chi.se = std::sqrt(m2_c / static_cast<double>(count - 1) / static_cast<double>(count));
  return out;
}

}  // namespace detail

// Monte Carlo forms of the single-set spectral integrals: for a draw with
// rescaled coordinates a_i = w_i / x_i,
//   d_A   averages weight * (min over A - max over A^c)_+,
//   chi_A averages weight * (min over A),
// with A^c read inside the sampler's full ground set. The sampler's moment
// identity is validated first; a failure is a model error.
template <spectral_sampler S>
CoefficientEstimates mc_subset_coefficients(const S& sampler, IndexSet a, const EvaluationPoint& x,
                                            std::size_t count, std::uint64_t seed) {
  const int dim = sampler.dimension();
  const IndexSet ground = IndexSet::full(dim);
  detail::check_subset_arg(a, ground, "mc_subset_coefficients");
  if (!ground.subset_of(x.support()))
    throw StructuralError("mc_subset_coefficients: point does not cover the ground set");
  if (count < 2) throw DomainError("mc_subset_coefficients: need at least two draws");
  SamplerValidation moments =
      validate_sampler(sampler, std::min<std::size_t>(count, 20000), CounterRng::mix(seed));
  if (!moments.pass)
    throw ModelError("mc_subset_coefficients: sampler moment validation failed");
  return detail::mc_accumulate(count, [&](std::uint64_t idx) {
    const WeightedDirection wd = sampler.draw(seed, idx);
    double mn = std::numeric_limits<double>::infinity();
    double mx = 0.0;
    for_each_member(ground, [&](int i) {
      const double v = wd.direction[static_cast<std::size_t>(i)] / x[i];
      if (a.contains(i)) {
        if (v < mn) mn = v;
      } else if (v > mx) {
        mx = v;
      }
    });
    const double chi_term = wd.weight * mn;
    const double d_term = mn > mx ? wd.weight * (mn - mx) : 0.0;
    return std::pair<double, double>(d_term, chi_term);
  }, std::move(moments));
}

// Same for a disjoint pair: d averages weight * (min(max_A, max_B) - max_C)_+
// and chi drops the C term.
template <spectral_sampler S>
CoefficientEstimates mc_pair_coefficients(const S& sampler, IndexSet a, IndexSet b,
                                          const EvaluationPoint& x, std::size_t count,
                                          std::uint64_t seed) {
  const int dim = sampler.dimension();
  const IndexSet ground = IndexSet::full(dim);
  detail::check_disjoint_pair(a, b, ground, "mc_pair_coefficients");
  if (!ground.subset_of(x.support()))
    throw StructuralError("mc_pair_coefficients: point does not cover the ground set");
  if (count < 2) throw DomainError("mc_pair_coefficients: need at least two draws");
  SamplerValidation moments =
      validate_sampler(sampler, std::min<std::size_t>(count, 20000), CounterRng::mix(seed));
  if (!moments.pass)
    throw ModelError("mc_pair_coefficients: sampler moment validation failed");
  return detail::mc_accumulate(count, [&](std::uint64_t idx) {
    const WeightedDirection wd = sampler.draw(seed, idx);
    double ma = 0.0, mb = 0.0, mc = 0.0;
    for_each_member(ground, [&](int i) {
      const double v = wd.direction[static_cast<std::size_t>(i)] / x[i];
      if (a.contains(i)) {
        if (v > ma) ma = v;
      } else if (b.contains(i)) {
        if (v > mb) mb = v;
      } else if (v > mc) {
        mc = v;
      }
    });
    const double inner = std::min(ma, mb);
    const double chi_term = wd.weight * inner;
    const double d_term = inner > mc ? wd.weight * (inner - mc) : 0.0;
    return std::pair<double, double>(d_term, chi_term);
  }, std::move(moments));
}

// Deterministic probe points spread over a box, used by the sampling
// verification: a small low-discrepancy-style lattice on [lo, hi]^dim.
inline std::vector<EvaluationPoint> deterministic_probe_points(IndexSet support, std::size_t count,
                                                               double lo = 0.5, double hi = 4.0) {
  if (!(lo > 0.0 && hi > lo)) throw DomainError("deterministic_probe_points: bad range");
  if (count == 0) throw DomainError("deterministic_probe_points: zero count");
  std::vector<EvaluationPoint> out;
  const int n = support.size();
  std::vector<double> coords(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < count; ++j) {
    for (int i = 0; i < n; ++i) {
      // Weyl sequence per coordinate; irrational strides decorrelate axes.
      const double frac = std::fmod((static_cast<double>(j) + 0.5) * (0.5 + 0.118033988749894848 * (i + 1)), 1.0);
      coords[static_cast<std::size_t>(i)] = lo + (hi - lo) * frac;
    }
    out.emplace_back(support, coords);
  }
  return out;
}

struct EcdfProbe {
  EvaluationPoint point;
  double empirical = 0.0;
  double expected = 0.0;
  double se = 0.0;
  bool within_three_se = false;
};

// Compares the batch ECDF against a caller-supplied exact CDF value at each
// probe point; the binomial standard error uses the exact probability.
template <class CdfFn>
std::vector<EcdfProbe> ecdf_probe_table(const SampleBatch& batch, IndexSet s,
                                        const std::vector<EvaluationPoint>& points, CdfFn&& cdf) {
  std::vector<EcdfProbe> out;
  for (const EvaluationPoint& p : points) {
    EcdfProbe probe{p, 0.0, 0.0, 0.0, false};
    probe.empirical = ecdf(batch, s, p);
    probe.expected = cdf(p);
    probe.se = std::sqrt(std::max(probe.expected * (1.0 - probe.expected), 0.0) /
                         static_cast<double>(batch.count));
    probe.within_three_se = std::fabs(probe.empirical - probe.expected) <= 3.0 * probe.se;
    out.push_back(probe);
  }
  return out;
}

}  // namespace xstable
