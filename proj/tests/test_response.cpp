#include "cqed/response.hpp"

#include <doctest.h>

#include <numbers>

using namespace cqed;

namespace {

const MemoryKernel &no_bath(double dt, std::size_t lags) {
  static thread_local MemoryKernel k;
  k = memory_kernel(zero_density(), 4.0, dt, lags);
  return k;
}

EngineConfig engine(double dt, std::size_t max_steps) {
  EngineConfig c;
  c.dt = dt;
  c.max_steps = max_steps;
  return c;
}

std::size_t argmax(const Spectrum &s) {
  return static_cast<std::size_t>(std::max_element(s.a_vals.begin(), s.a_vals.end()) - s.a_vals.begin());
}

} // namespace

TEST_CASE("drive operators") {
  const Matrix3 d = DriveMode{DriveKind::dipole}.mu();
  const Matrix3 c = DriveMode{DriveKind::cavity}.mu();
  CHECK(d(kE0, kG0) == Complex(1.0));
  CHECK(d(kG0, kE0) == Complex(1.0));
  CHECK(d.cwiseAbs().sum() == 2.0);
  CHECK(c(kG1, kG0) == Complex(1.0));
  CHECK(c.cwiseAbs().sum() == 2.0);
  CHECK(DriveMode{DriveKind::cavity}.name() == "cavity");
}

TEST_CASE("response starts at unity for both drives") {
  SystemParams sys;
  sys.g = 0.01;
  sys.gamma = 0.002;
  sys.kappa = 0.004;
  for (DriveKind kind : {DriveKind::dipole, DriveKind::cavity}) {
    const ResponseSeries s = response_function(DriveMode{kind}, engine(5.0, 10), sys, no_bath(5.0, 10), 10);
    REQUIRE(s.values.size() == 11);
    CHECK(std::abs(s.values.front() - 1.0) < 1e-15);
    CHECK(s.times[3] == 15.0);
    CHECK_FALSE(s.warnings.empty());
  }
}

TEST_CASE("lossless vacuum Rabi response is cos(g t)") {
  SystemParams sys;
  sys.g = 0.015;
  const ResponseSeries s = response_function(DriveMode{}, engine(5.0, 200), sys, no_bath(5.0, 200), 200);
  for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(std::abs(s.values[k] - std::cos(sys.g * s.times[k])) < 1e-12);
}

TEST_CASE("bare emitter decays at half the population rate") {
  SystemParams sys;
  sys.gamma = 0.004;
  const ResponseSeries s = response_function(DriveMode{}, engine(5.0, 100), sys, no_bath(5.0, 100), 100);
  for (std::size_t k = 0; k < s.values.size(); ++k)
    CHECK(std::abs(s.values[k] - std::exp(-0.5 * sys.gamma * s.times[k])) < 1e-12);
}

TEST_CASE("equilibration stop") {
  SystemParams sys;
  sys.gamma = 0.004;
  const ResponseSeries s = response_until_equilibrium(DriveMode{}, engine(5.0, 4096), sys, no_bath(5.0, 4096));
  CHECK(s.residual < kEquilibrationThreshold);
  CHECK(s.warnings.empty());
  CHECK(s.values.size() < 1000);
  const ResponseSeries capped = response_until_equilibrium(DriveMode{}, engine(5.0, 50), sys, no_bath(5.0, 50));
  CHECK(capped.values.size() == 51);
  CHECK_FALSE(capped.warnings.empty());
}

TEST_CASE("spectrum equals a direct Fourier sum") {
  ResponseSeries s;
  s.cfg.dt = 3.0;
  s.omega_e = 2.0;
  for (int k = 0; k < 40; ++k) {
    s.times.push_back(3.0 * k);
    s.values.push_back(std::exp(Complex(-0.01, 0.02) * (3.0 * k)));
  }
  for (bool hann : {false, true}) {
    const Spectrum spec = absorption_spectrum(s, 64, hann);
    REQUIRE(spec.omega.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) {
      const double w = spec.omega[i] - s.omega_e;
      Complex acc = 0.0;
      for (std::size_t k = 0; k < s.values.size(); ++k) {
        double wt = k == 0 ? 0.5 : 1.0;
        if (hann) wt *= 0.5 * (1.0 + std::cos(std::numbers::pi * double(k) / double(s.values.size())));
        acc += wt * s.values[k] * std::exp(Complex(0.0, w * s.times[k])) * s.dt();
      }
      CHECK(spec.a_vals[i] == doctest::Approx(2.0 * acc.real()).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("Lorentzian line shape") {
  SystemParams sys;
  sys.gamma = 0.004;
  const ResponseSeries s = response_until_equilibrium(DriveMode{}, engine(5.0, 4096), sys, no_bath(5.0, 4096));
  const Spectrum spec = absorption_spectrum(s);
  CHECK(spec.pad_to == kDefaultPad);
  const std::size_t ip = argmax(spec);
  CHECK(std::abs(spec.omega[ip] - sys.omega_e) <= spec.resolution);
  CHECK(spec.a_vals[ip] == doctest::Approx(4.0 / sys.gamma).epsilon(1e-3));
  // full width at half maximum
  const double half = 0.5 * spec.a_vals[ip];
  std::size_t l = ip, r = ip;
  while (spec.a_vals[l] > half) --l;
  while (spec.a_vals[r] > half) ++r;
  auto cross = [&](std::size_t a, std::size_t b) {
    const double f = (half - spec.a_vals[a]) / (spec.a_vals[b] - spec.a_vals[a]);
    return spec.omega[a] + f * (spec.omega[b] - spec.omega[a]);
  };
  const double fwhm = cross(r, r - 1) - cross(l, l + 1);
  CHECK(fwhm == doctest::Approx(sys.gamma).epsilon(1e-3));
  CHECK(integrate_spectrum(spec) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-3));
  CHECK_THROWS_AS(find_splitting(spec), SplittingError);
}

TEST_CASE("zero padding only refines the grid") {
  SystemParams sys;
  sys.gamma = 0.01;
  const ResponseSeries s = response_until_equilibrium(DriveMode{}, engine(5.0, 4096), sys, no_bath(5.0, 4096));
  const Spectrum a = absorption_spectrum(s, 1 << 12);
  const Spectrum b = absorption_spectrum(s, 1 << 13);
  CHECK(b.resolution == doctest::Approx(0.5 * a.resolution));
  for (std::size_t i = 0; i < a.a_vals.size(); ++i) {
    CHECK(std::abs(a.omega[i] - b.omega[2 * i]) < 1e-12);
    CHECK(std::abs(a.a_vals[i] - b.a_vals[2 * i]) < 1e-9);
  }
  CHECK_THROWS_AS(absorption_spectrum(s, 3000), std::invalid_argument);
  CHECK_THROWS_AS(absorption_spectrum(s, 16), std::invalid_argument);
}

TEST_CASE("rotating and laboratory frames agree") {
  SystemParams sys;
  sys.gamma = 0.05;
  const double dt = 0.1;
  const ResponseSeries rot = response_until_equilibrium(DriveMode{}, engine(dt, 8192), sys, no_bath(dt, 8192));
  sys.rotating_frame = false;
  const ResponseSeries lab = response_until_equilibrium(DriveMode{}, engine(dt, 8192), sys, no_bath(dt, 8192));
  CHECK(std::abs(lab.values[10] - rot.values[10] * std::exp(Complex(0.0, -sys.omega_e * lab.times[10]))) < 1e-12);
  const Spectrum a = absorption_spectrum(rot, 1 << 14);
  const Spectrum b = absorption_spectrum(lab, 1 << 14);
  CHECK(std::abs(a.omega[argmax(a)] - b.omega[argmax(b)]) <= a.resolution);
  CHECK(integrate_spectrum(a) == doctest::Approx(integrate_spectrum(b)).epsilon(1e-6));
}

TEST_CASE("resonant vacuum Rabi splitting") {
  SystemParams sys;
  sys.g = 0.015;
  sys.gamma = 0.002;
  sys.kappa = 0.002;
  for (DriveKind kind : {DriveKind::dipole, DriveKind::cavity}) {
    const ResponseSeries s = response_until_equilibrium(DriveMode{kind}, engine(5.0, 4096), sys, no_bath(5.0, 4096));
    const Spectrum spec = absorption_spectrum(s);
    const Splitting sp = find_splitting(spec);
    CHECK(sp.splitting == doctest::Approx(2.0 * sys.g).epsilon(1e-3));
    CHECK(0.5 * (sp.peaks.first + sp.peaks.second) == doctest::Approx(sys.omega_e).epsilon(1e-6));
    CHECK(sp.peaks.first < sp.peaks.second);
    CHECK_THROWS_AS(find_splitting(spec, std::pair{sys.omega_e, sys.omega_e + 0.1}), SplittingError);
    CHECK_THROWS_AS(find_splitting(spec, std::pair{sys.omega_e, sys.omega_e + 1e-6}), SplittingError);
  }
}
