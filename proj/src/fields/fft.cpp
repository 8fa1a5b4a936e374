#include "polaron/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace polaron::fft {
namespace {

enum class Kind { kForward, kBackward, kR2C, kC2R };

using Key = std::tuple<int, int, int, Kind, bool, bool>;

struct PlanCache {
  std::map<Key, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

bool aligned(const void* p) {
  return fftw_alignment_of(reinterpret_cast<double*>(const_cast<void*>(p))) ==
         0;
}

fftw_plan plan_for(const Dims& d, Kind kind, void* in, void* out) {
  const bool inplace = in == out;
  const bool al = aligned(in) && aligned(out);
  const Key key{d[0], d[1], d[2], kind, inplace, al};
  auto& c = cache();
  std::lock_guard lock(planner_mutex());
  if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;
  unsigned flags = FFTW_ESTIMATE | (al ? 0u : FFTW_UNALIGNED);
  fftw_plan p = nullptr;
  // FFTW wants the slowest dimension first.
  switch (kind) {
    case Kind::kForward:
      p = fftw_plan_dft_3d(d[2], d[1], d[0], static_cast<fftw_complex*>(in),
                           static_cast<fftw_complex*>(out), FFTW_FORWARD,
                           flags);
      break;
    case Kind::kBackward:
      p = fftw_plan_dft_3d(d[2], d[1], d[0], static_cast<fftw_complex*>(in),
                           static_cast<fftw_complex*>(out), FFTW_BACKWARD,
                           flags);
      break;
    case Kind::kR2C:
      p = fftw_plan_dft_r2c_3d(d[2], d[1], d[0], static_cast<double*>(in),
                               static_cast<fftw_complex*>(out), flags);
      break;
    case Kind::kC2R:
      p = fftw_plan_dft_c2r_3d(d[2], d[1], d[0],
                               static_cast<fftw_complex*>(in),
                               static_cast<double*>(out), flags);
      break;
  }
  if (p == nullptr) throw Error("FFTW failed to create a plan");
  c.plans.emplace(key, p);
  return p;
}

fftw_complex* fc(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

}  // namespace

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void forward(const Dims& dims, const cplx* in, cplx* out) {
  fftw_plan p = plan_for(dims, Kind::kForward, fc(in), fc(out));
  fftw_execute_dft(p, fc(in), fc(out));
}

void backward(const Dims& dims, const cplx* in, cplx* out) {
  fftw_plan p = plan_for(dims, Kind::kBackward, fc(in), fc(out));
  fftw_execute_dft(p, fc(in), fc(out));
}

void r2c(const Dims& dims, const double* in, cplx* out) {
  auto* rin = const_cast<double*>(in);
  fftw_plan p = plan_for(dims, Kind::kR2C, rin, fc(out));
  fftw_execute_dft_r2c(p, rin, fc(out));
}

void c2r(const Dims& dims, cplx* in, double* out) {
  fftw_plan p = plan_for(dims, Kind::kC2R, fc(in), out);
  fftw_execute_dft_c2r(p, fc(in), out);
}

}  // namespace polaron::fft
