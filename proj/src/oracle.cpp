#include "qpinem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "qpinem/error.hpp"

namespace qpinem {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

// exp(G) v for anti-Hermitian G with ||G|| <= norm_bound, by Taylor steps of size <= 1/2.
CVector expv(const SpMat& gen, CVector v, double norm_bound) {
  const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * norm_bound)));
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    CVector term = v;
    CVector acc = v;
    for (int j = 1; j < 80; ++j) {
      term = (gen * term) * (h / j);
      acc += term;
      if (term.norm() < 1e-18 * acc.norm()) break;
    }
    v = std::move(acc);
  }
  return v;
}

struct Component {
  double weight;
  CVector psi;
};

std::vector<Component> decompose(const PhotonicState& state) {
  std::vector<Component> out;
  switch (state.storage()) {
    case PhotonicState::Storage::Pure:
      out.push_back({1.0, state.vector()});
      return out;
    case PhotonicState::Storage::Diagonal: {
      const auto p = state.diagonal();
      for (int n = 0; n < state.cutoff(); ++n) {
        if (p[n] <= 0.0) continue;
        CVector e = CVector::Zero(state.cutoff());
        e(n) = 1.0;
        out.push_back({p[n], std::move(e)});
      }
      return out;
    }
    case PhotonicState::Storage::Dense:
      break;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(state.dense());
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = es.eigenvalues()(i);
    if (w > 1e-15) out.push_back({w, es.eigenvectors().col(i)});
  }
  return out;
}

}  // namespace

InteractionOutcome oracle_spectrum(const PhotonicState& state, Coupling g,
                                   const OracleOptions& opts) {
  const cplx gv = g.value();
  const cplx gamma = opts.lo_field ? gv * std::conj(*opts.lo_field) : cplx(0.0);
  int pad = std::max(opts.photon_padding, 1);
  int lw = opts.half_width.value_or(0);
  const auto components = decompose(state);

  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    const int dim_n = state.cutoff() + pad;
    if (!opts.half_width || attempt > 0) {
      const int auto_lw = default_half_width(g.magnitude * std::sqrt(dim_n * 1.0)) +
                          default_half_width(std::abs(gamma));
      lw = std::max(lw, auto_lw);
    }
    const int width = 2 * lw + 1;
    const int dim = dim_n * width;
    auto index = [&](int n, int k) { return n * width + (k + lw); };

    std::vector<Triplet> trip;
    trip.reserve(2 * dim);
    for (int n = 0; n < dim_n; ++n) {
      for (int k = -lw; k <= lw; ++k) {
        if (n + 1 < dim_n && k - 1 >= -lw) {
          trip.emplace_back(index(n + 1, k - 1), index(n, k), gv * std::sqrt(n + 1.0));
        }
        if (n >= 1 && k + 1 <= lw) {
          trip.emplace_back(index(n - 1, k + 1), index(n, k), -std::conj(gv) * std::sqrt(n * 1.0));
        }
      }
    }
    SpMat gen(dim, dim);
    gen.setFromTriplets(trip.begin(), trip.end());
    const double bound = 2.0 * g.magnitude * std::sqrt(dim_n * 1.0);

    SpMat lo_gen(dim, dim);
    if (gamma != cplx(0.0)) {
      std::vector<Triplet> lt;
      for (int n = 0; n < dim_n; ++n) {
        for (int k = -lw; k <= lw; ++k) {
          if (k - 1 >= -lw) lt.emplace_back(index(n, k - 1), index(n, k), gamma);
          if (k + 1 <= lw) lt.emplace_back(index(n, k + 1), index(n, k), -std::conj(gamma));
        }
      }
      lo_gen.setFromTriplets(lt.begin(), lt.end());
    }

    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(dim_n, width);
    CMatrix post = CMatrix::Zero(dim_n, dim_n);
    double boundary = 0.0;
    for (const auto& comp : components) {
      CVector v = CVector::Zero(dim);
      for (int n = 0; n < state.cutoff(); ++n) v(index(n, 0)) = comp.psi(n);
      if (gamma != cplx(0.0)) v = expv(lo_gen, std::move(v), 2.0 * std::abs(gamma));
      v = expv(gen, std::move(v), bound);
      for (int k = -lw; k <= lw; ++k) {
        CVector col(dim_n);
        for (int n = 0; n < dim_n; ++n) {
          col(n) = v(index(n, k));
          const double pr = comp.weight * std::norm(col(n));
          joint(n, k + lw) += pr;
          if (n == dim_n - 1 || k == -lw || k == lw) boundary += pr;
        }
        post.noalias() += comp.weight * (col * col.adjoint());
      }
    }
    if (boundary > opts.leakage_tol) {
      pad *= 2;
      lw += lw / 2 + 1;
      continue;
    }

    JointDistribution jd;
    jd.k_min = -lw;
    jd.k_max = lw;
    jd.probs = std::move(joint);
    ElectronSpectrum spec = jd.marginal_k();
    spec.engine = "oracle";
    spec.leakage = boundary;
    std::vector<double> q(dim_n);
    for (int n = 0; n < dim_n; ++n) q[n] = post(n, n).real();
    int keep = dim_n;
    while (keep > 1 && q[keep - 1] < 1e-18) --keep;
    CMatrix trimmed = post.topLeftCorner(keep, keep);
    InteractionOutcome out{spec, PhotonicState::from_matrix(std::move(trimmed),
                                                            state.label() + "|oracle_traced",
                                                            state.tail_mass() + boundary),
                           std::move(jd)};
    return out;
  }
  throw NumericalError("oracle_spectrum: truncation leakage stays above tolerance after retries");
}

ElectronSpectrum oracle_two_mode_spectrum(cplx alpha1, cplx alpha2, int cutoff, Coupling g,
                                          const OracleOptions& opts) {
  const auto s1 = make_coherent(alpha1, cutoff);
  const auto s2 = make_coherent(alpha2, cutoff);
  const cplx gv = g.value();
  int pad = std::max(opts.photon_padding, 1);
  const double mean = std::norm(alpha1) + std::norm(alpha2);
  int lw = opts.half_width.value_or(0);

  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    const int dn = cutoff + pad;
    if (!opts.half_width || attempt > 0) {
      lw = std::max(lw, default_half_width(std::sqrt(2.0) * g.magnitude *
                                           std::sqrt(mean + 2.0 * dn)));
    }
    const int width = 2 * lw + 1;
    const int dim = dn * dn * width;
    auto index = [&](int n1, int n2, int k) { return (n1 * dn + n2) * width + (k + lw); };
    std::vector<Triplet> trip;
    trip.reserve(4 * dim);
    for (int n1 = 0; n1 < dn; ++n1) {
      for (int n2 = 0; n2 < dn; ++n2) {
        for (int k = -lw; k <= lw; ++k) {
          const int from = index(n1, n2, k);
          if (k - 1 >= -lw) {
            if (n1 + 1 < dn) trip.emplace_back(index(n1 + 1, n2, k - 1), from, gv * std::sqrt(n1 + 1.0));
            if (n2 + 1 < dn) trip.emplace_back(index(n1, n2 + 1, k - 1), from, gv * std::sqrt(n2 + 1.0));
          }
          if (k + 1 <= lw) {
            if (n1 >= 1) trip.emplace_back(index(n1 - 1, n2, k + 1), from, -std::conj(gv) * std::sqrt(n1 * 1.0));
            if (n2 >= 1) trip.emplace_back(index(n1, n2 - 1, k + 1), from, -std::conj(gv) * std::sqrt(n2 * 1.0));
          }
        }
      }
    }
    SpMat gen(dim, dim);
    gen.setFromTriplets(trip.begin(), trip.end());
    CVector v = CVector::Zero(dim);
    for (int n1 = 0; n1 < cutoff; ++n1) {
      for (int n2 = 0; n2 < cutoff; ++n2) {
        v(index(n1, n2, 0)) = s1.vector()(n1) * s2.vector()(n2);
      }
    }
    v = expv(gen, std::move(v), 4.0 * g.magnitude * std::sqrt(dn * 1.0));
    std::vector<double> pk(width, 0.0);
    double boundary = 0.0;
    for (int n1 = 0; n1 < dn; ++n1) {
      for (int n2 = 0; n2 < dn; ++n2) {
        for (int k = -lw; k <= lw; ++k) {
          const double pr = std::norm(v(index(n1, n2, k)));
          pk[k + lw] += pr;
          if (n1 == dn - 1 || n2 == dn - 1 || k == -lw || k == lw) boundary += pr;
        }
      }
    }
    if (boundary > opts.leakage_tol) {
      pad *= 2;
      lw += lw / 2 + 1;
      continue;
    }
    ElectronSpectrum spec;
    spec.k_min = -lw;
    spec.k_max = lw;
    spec.probs = std::move(pk);
    spec.leakage = boundary;
    spec.engine = "oracle_two_mode";
    return spec;
  }
  throw NumericalError("oracle_two_mode_spectrum: truncation leakage stays above tolerance");
}

}  // namespace qpinem
