// Binding gap 2 E_P - E_PT at alpha = 1 on two resolutions of one box.
//
// Both energies are variational upper bounds on their discrete problems; the
// Richardson deltas measure discretization error only, so a certified gap is
// numerical evidence of binding, not a proof.

#include <algorithm>
#include <cmath>
#include <map>

#include "polaron/bipolaron.hpp"

namespace polaron::bipolaron {
namespace {

EnergyEstimate richardson(double coarse, double fine, int nc, int nf) {
  EnergyEstimate e;
  e.coarse = coarse;
  e.fine = fine;
  const double ratio = std::pow(static_cast<double>(nf) / nc, 2);
  e.extrapolated = fine + (fine - coarse) / (ratio - 1.0);
  e.error = std::abs(e.extrapolated - fine);
  return e;
}

class Scanner {
 public:
  Scanner(const PotentialPair& pair, const BindingOptions& opts)
      : pair_(pair), opts_(opts) {
    if (opts.coarse_points >= opts.fine_points)
      throw ValidationError("coarse grid must have fewer points than the fine grid");
    if (opts.rank < 1) throw ValidationError("rank must be >= 1");
    extent_ = opts.extent > 0.0 ? opts.extent
                                : kBoxFraction * pekar::default_extent(pair, 1.0);
    coarse_ = std::make_unique<Grid3D>(opts.coarse_points, extent_, opts.boundary);
    fine_ = std::make_unique<Grid3D>(opts.fine_points, extent_, opts.boundary);
  }

  BindingReport at(double u) {
    if (!(u >= 0.0) || !std::isfinite(u))
      throw ValidationError("repulsion u must be non-negative and finite");
    if (!pekar_) {
      pekar::MinimizeOptions po = opts_.pt.pekar;
      auto solve_pekar = [&](const pekar::PekarProblem& p,
                             const pekar::MinimizeOptions& o) {
        return opts_.pekar_solver ? opts_.pekar_solver(p, o)
                                  : pekar::minimize_pekar(p, o);
      };
      const auto c = solve_pekar({pair_, 1.0, *coarse_, nullptr}, po);
      po.initializer = pekar::Initializer::kProvided;
      po.start = c.phi;
      const auto f = solve_pekar({pair_, 1.0, *fine_, nullptr}, po);
      pekar_ = richardson(c.energy, f.energy, opts_.coarse_points,
                          opts_.fine_points);
      pekar_converged_ = c.converged && f.converged;
    }
    bool conv = pekar_converged_;
    const double ec = solve(u, *coarse_, coarse_starts_, conv);
    const double ef = solve(u, *fine_, fine_starts_, conv);

    BindingReport rep;
    rep.u = u;
    rep.pekar = *pekar_;
    rep.pt = richardson(ec, ef, opts_.coarse_points, opts_.fine_points);
    rep.twice_EP = 2.0 * rep.pekar.fine;
    rep.EPT_upper = rep.pt.fine;
    rep.gap = rep.twice_EP - rep.EPT_upper;
    rep.gap_extrapolated = 2.0 * rep.pekar.extrapolated - rep.pt.extrapolated;
    rep.error_bar = 2.0 * rep.pekar.error + rep.pt.error;
    rep.certified = rep.gap > rep.error_bar;
    rep.converged = conv;
    return rep;
  }

 private:
  // Box as a fraction of the single-polaron default; the pair is about as
  // large as one polaron and both energies see the same truncation.
  static constexpr double kBoxFraction = 0.65;

  double solve(double u, const Grid3D& grid,
               std::map<double, SeparableAnsatz>& starts, bool& converged) {
    PtOptions o = opts_.pt;
    if (!starts.empty()) {
      // Warm start from the nearest repulsion solved so far.
      auto best = starts.begin();
      for (auto it = starts.begin(); it != starts.end(); ++it)
        if (std::abs(it->first - u) < std::abs(best->first - u)) best = it;
      o.start = best->second;
    } else if (&grid == fine_.get() && !coarse_starts_.empty()) {
      o.start = coarse_starts_.rbegin()->second;
    }
    PtSolution s = minimize_pt({pair_, u, 1.0, grid}, opts_.rank, o);
    // A warm start from a very different repulsion can strand the descent;
    // keep the better of it and the default seed.
    if (o.start && !opts_.pt.start) {
      PtOptions fresh = opts_.pt;
      if (!s.converged) {
        PtSolution t = minimize_pt({pair_, u, 1.0, grid}, opts_.rank, fresh);
        if (t.energy < s.energy) s = std::move(t);
      }
    }
    starts.insert_or_assign(u, s.ansatz);
    converged = converged && s.converged;
    return s.energy;
  }

  PotentialPair pair_;
  BindingOptions opts_;
  double extent_ = 0.0;
  std::unique_ptr<Grid3D> coarse_, fine_;
  std::optional<EnergyEstimate> pekar_;
  bool pekar_converged_ = false;
  std::map<double, SeparableAnsatz> coarse_starts_, fine_starts_;
};

}  // namespace

BindingReport binding_gap(const PotentialPair& pair, double u,
                          const BindingOptions& opts) {
  Scanner sc(pair, opts);
  return sc.at(u);
}

std::vector<BindingReport> binding_scan(const PotentialPair& pair,
                                        const std::vector<double>& us,
                                        const BindingOptions& opts) {
  Scanner sc(pair, opts);
  std::vector<BindingReport> out;
  out.reserve(us.size());
  for (double u : us) out.push_back(sc.at(u));
  return out;
}

ThresholdScan threshold_scan(const PotentialPair& pair, double u_min,
                             double u_max, double resolution,
                             const BindingOptions& opts) {
  if (!(u_min >= 0.0) || !(u_max > u_min))
    throw ValidationError("repulsion range must satisfy 0 <= u_min < u_max");
  if (!(resolution > 0.0)) throw ValidationError("resolution must be positive");
  Scanner sc(pair, opts);
  ThresholdScan out;
  auto record = [&](double u) {
    out.curve.push_back(sc.at(u));
    return out.curve.back().certified;
  };
  double lo = u_min, hi = u_max;
  if (!record(lo)) {
    out.lower = out.upper = u_min;
  } else if (record(hi)) {
    out.lower = out.upper = u_max;
  } else {
    while (hi - lo > resolution) {
      const double mid = 0.5 * (lo + hi);
      (record(mid) ? lo : hi) = mid;
    }
    out.lower = lo;
    out.upper = hi;
  }
  std::sort(out.curve.begin(), out.curve.end(),
            [](const BindingReport& a, const BindingReport& b) { return a.u < b.u; });
  return out;
}

}  // namespace polaron::bipolaron
