// Literal, loop-based transcription of one CMA-ES generation, written
// independently of elas::cma::step so the two can be compared.
#ifndef ELAS_TESTS_CMA_ORACLE_HPP
#define ELAS_TESTS_CMA_ORACLE_HPP

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Params {
  int lambda, mu;
  std::vector<double> w;
  double mu_w, cs, ds, cc, c1, cmu;
};

inline Params params(int d, int lambda) {
  Params p;
  p.lambda = lambda;
  p.mu = lambda / 2;
  double s = 0;
  for (int i = 1; i <= p.mu; ++i) {
    p.w.push_back(std::log(p.mu + 0.5) - std::log(double(i)));
    s += p.w.back();
  }
  double sq = 0;
  for (auto& v : p.w) {
    v /= s;
    sq += v * v;
  }
  p.mu_w = 1 / sq;
  p.cs = (p.mu_w + 2) / (d + p.mu_w + 5);
  p.ds = 1 + 2 * std::max(0.0, std::sqrt((p.mu_w - 1) / (d + 1)) - 1) + p.cs;
  p.cc = (4 + p.mu_w / d) / (d + 4 + 2 * p.mu_w / d);
  p.c1 = 2 / ((d + 1.3) * (d + 1.3) + p.mu_w);
  p.cmu = std::min(1 - p.c1, 2 * (p.mu_w - 2 + 1 / p.mu_w) / ((d + 2.0) * (d + 2.0) + p.mu_w));
  return p;
}

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

struct State {
  Vec m;
  double sigma;
  Mat C;
  Vec ps, pc;
  long g;
};

inline State step(const State& s, const std::vector<Vec>& x, const Vec& f, const Params& p, bool correction) {
  const int d = static_cast<int>(s.m.size());
  std::vector<int> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });

  // line 5: m' = sum w_i x_{i:lambda}
  Vec m(d, 0.0);
  for (int i = 0; i < p.mu; ++i)
    for (int j = 0; j < d; ++j) m[j] += p.w[i] * x[order[i]][j];

  // C^{-1/2} from Eigen's self-adjoint solver
  Eigen::MatrixXd C(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) C(i, j) = s.C[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  Eigen::MatrixXd Cis = es.operatorInverseSqrt();

  // line 6: p_sigma
  Vec y(d);
  for (int j = 0; j < d; ++j) y[j] = (m[j] - s.m[j]) / s.sigma;
  Vec ps(d);
  const double a = std::sqrt(p.cs * (2 - p.cs) * p.mu_w);
  for (int i = 0; i < d; ++i) {
    double acc = 0;
    for (int j = 0; j < d; ++j) acc += Cis(i, j) * y[j];
    ps[i] = (1 - p.cs) * s.ps[i] + a * acc;
  }
  double nps = 0;
  for (double v : ps) nps += v * v;
  nps = std::sqrt(nps);
  const double chi = std::sqrt(2.0) * std::tgamma((d + 1) / 2.0) / std::tgamma(d / 2.0);

  // line 7: h_sigma
  const double lhs = nps / std::sqrt(1 - std::pow(1 - p.cs, 2.0 * (s.g + 1)));
  const int hs = lhs < (1.4 + 2.0 / (d + 1)) * chi ? 1 : 0;

  // line 8: p_c
  Vec pc(d);
  const double b = std::sqrt(p.cc * (2 - p.cc) * p.mu_w);
  for (int i = 0; i < d; ++i) pc[i] = (1 - p.cc) * s.pc[i] + hs * b * y[i];

  // lines 9-10: C_mu and C
  State out;
  out.C.assign(d, Vec(d, 0.0));
  double keep = 1 - p.c1 - p.cmu;
  if (correction && !hs) keep += p.c1 * p.cc * (2 - p.cc);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double cmu = 0;
      for (int k = 0; k < p.mu; ++k) {
        const auto& xk = x[order[k]];
        cmu += p.w[k] * (xk[i] - s.m[i]) * (xk[j] - s.m[j]) / (s.sigma * s.sigma);
      }
      out.C[i][j] = keep * s.C[i][j] + p.c1 * pc[i] * pc[j] + p.cmu * cmu;
    }

  // line 11: sigma
  out.sigma = s.sigma * std::exp(p.cs / p.ds * (nps / chi - 1));
  out.m = m;
  out.ps = ps;
  out.pc = pc;
  out.g = s.g + 1;
  return out;
}

}  // namespace oracle

#endif
