#include <catch2/catch.hpp>

#include "qwire/fields.hpp"

using namespace qwire;

TEST_CASE("barrier profile follows the piecewise shape") {
  BarrierSpec b{0.08, 160.0, -30.0};

  SECTION("support edges and outside are exactly zero") {
    CHECK(barrier_profile(b, -30.0) == 0.0);
    CHECK(barrier_profile(b, 130.0) == 0.0);
    CHECK(barrier_profile(b, -30.0 - 1e-9) == 0.0);
    CHECK(barrier_profile(b, 130.0 + 1e-9) == 0.0);
    CHECK(barrier_profile(b, -1000.0) == 0.0);
  }

  SECTION("plateau and ramp values") {
    CHECK(barrier_profile(b, -30.0 + 80.0) == Approx(0.08).epsilon(1e-14));
    CHECK(barrier_profile(b, -30.0 + 16.0) == Approx(0.08).epsilon(1e-12));
    CHECK(barrier_profile(b, -30.0 + 144.0) == Approx(0.08).epsilon(1e-12));
    // ramp midpoint at L/20: sin^2(pi/4) = 1/2
    CHECK(barrier_profile(b, -30.0 + 8.0) == Approx(0.04).epsilon(1e-12));
    CHECK(barrier_profile(b, -30.0 + 152.0) == Approx(0.04).epsilon(1e-12));
  }

  SECTION("continuity at every branch boundary") {
    for (double xb : {-30.0, -30.0 + 16.0, -30.0 + 144.0, 130.0}) {
      double prev = barrier_profile(b, xb);
      for (double eps : {1e-3, 1e-5, 1e-7}) {
        CHECK(std::abs(barrier_profile(b, xb + eps) - prev) < 1e-2 * eps / 1e-3 + 1e-6);
        CHECK(std::abs(barrier_profile(b, xb - eps) - prev) < 1e-2 * eps / 1e-3 + 1e-6);
      }
    }
  }

  SECTION("sign free") {
    BarrierSpec well{-0.05, 20.0, 0.0};
    CHECK(barrier_profile(well, 10.0) == Approx(-0.05));
  }
}

TEST_CASE("switch envelope") {
  SECTION("unbounded plateau") {
    SwitchSpec s{5.0, std::nullopt, 5.0};
    s.validate();
    CHECK(switch_envelope(s, -1.0) == 0.0);
    CHECK(switch_envelope(s, 0.0) == 0.0);
    CHECK(switch_envelope(s, 2.5) == Approx(0.5).epsilon(1e-14));
    CHECK(switch_envelope(s, 5.0) == 1.0);
    CHECK(switch_envelope(s, 1e6) == 1.0);
    CHECK(s.end_time() == std::numeric_limits<double>::infinity());
  }

  SECTION("bounded plateau returns to zero") {
    SwitchSpec s{5.0, 40.0, 5.0};
    s.validate();
    CHECK(switch_envelope(s, 20.0) == 1.0);
    CHECK(switch_envelope(s, 45.0) == 1.0);
    CHECK(switch_envelope(s, 47.5) == Approx(0.5).epsilon(1e-14));
    CHECK(switch_envelope(s, 50.0) == 0.0);
    CHECK(switch_envelope(s, 1e5) == 0.0);
    CHECK(s.end_time() == Approx(50.0));
  }

  SECTION("validation") {
    SwitchSpec bad{0.0, std::nullopt, 5.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    SwitchSpec bad2{5.0, 10.0, 0.0};
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  }
}

TEST_CASE("laser pulse vector potential") {
  PulseSpec p = PulseSpec::from_cycles(1.0, 800.0, 10, 160.0, 0.0);

  SECTION("ten cycles of 800 nm last about 26.7 fs") {
    CHECK(p.tau == Approx(10.0 * 800.0 / speed_of_light).epsilon(1e-14));
    CHECK(std::abs(p.tau - 26.7) < 0.02);
  }

  SECTION("derived carrier quantities") {
    CHECK(p.omega0() == Approx(2.0 * pi * speed_of_light / 800.0).epsilon(1e-14));
    CHECK(p.omega0() == Approx(2.35456).epsilon(1e-5));
    CHECK(p.a0() == Approx(1.0 * 800.0 / (2.0 * pi * speed_of_light)).epsilon(1e-14));
    CHECK(p.a0() == Approx(0.42471).epsilon(1e-4));
  }

  SECTION("support is exactly zero outside") {
    CHECK(vector_potential(p, -1.0, 10.0) == 0.0);
    CHECK(vector_potential(p, 161.0, 10.0) == 0.0);
    CHECK(vector_potential(p, 0.0, 10.0) == 0.0);
    CHECK(vector_potential(p, 160.0, 10.0) == 0.0);
    CHECK(vector_potential(p, 80.0, -0.5) == 0.0);
    CHECK(vector_potential(p, 80.0, p.tau) == 0.0);
    CHECK(vector_potential(p, 80.0, p.tau + 3.0) == 0.0);
  }

  SECTION("mid-support, mid-pulse value") {
    const double t = 0.5 * p.tau;
    CHECK(vector_potential(p, 80.0, t) ==
          Approx(p.a0() * std::sin(p.omega0() * t)).epsilon(1e-12));
  }
}

TEST_CASE("electric field is the exact negative time derivative") {
  PulseSpec p = PulseSpec::from_cycles(1.0, 800.0, 10, 160.0, 0.0);

  SECTION("zero at the temporal edges") {
    CHECK(electric_field(p, 80.0, 0.0) == 0.0);
    CHECK(electric_field(p, 80.0, p.tau) == 0.0);
  }

  SECTION("matches a numerical derivative of A") {
    for (double t : {3.3, 7.7, 13.35, 20.1}) {
      const double h = 1e-6;
      const double dnum =
          (vector_potential(p, 47.0, t + h) - vector_potential(p, 47.0, t - h)) /
          (2.0 * h);
      CHECK(electric_field(p, 47.0, t) == Approx(-dnum).epsilon(1e-6));
    }
  }

  SECTION("no DC component: integral of F over the pulse vanishes") {
    for (double x : {20.0, 80.0, 140.0}) {
      const int n = 20000;
      double acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double t = p.tau * double(i) / n;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * electric_field(p, x, t);
      }
      acc *= p.tau / n;
      CHECK(std::abs(acc) < 1e-8);
    }
  }

  SECTION("peak field approaches f0") {
    double fmax = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double t = p.tau * double(i) / 100000.0;
      fmax = std::max(fmax, std::abs(electric_field(p, 80.0, t)));
    }
    CHECK(fmax == Approx(1.0).epsilon(0.08));
  }
}

TEST_CASE("ponderomotive potential") {
  PhysicalContext ctx;
  PulseSpec p = PulseSpec::from_cycles(1.0, 800.0, 10, 160.0, 0.0);

  SECTION("zero outside the support") {
    CHECK(ponderomotive_profile(p, ctx, -5.0, 13.0) == 0.0);
    CHECK(ponderomotive_profile(p, ctx, 80.0, p.tau + 1.0) == 0.0);
  }

  SECTION("peak value matches the closed formula") {
    const double w0 = p.omega0();
    const double oracle = 1.0 / (4.0 * ctx.mass * w0 * w0);  // e = f0 = 1
    const double up = ponderomotive_profile(p, ctx, 80.0, 0.5 * p.tau);
    CHECK(up == Approx(oracle).epsilon(1e-12));
    CHECK(up == Approx(7.93e-3).margin(1e-5));
  }

  SECTION("scales as f0^2 and lambda0^2") {
    PulseSpec p2 = PulseSpec::from_cycles(2.0, 800.0, 10, 160.0, 0.0);
    CHECK(ponderomotive_profile(p2, ctx, 80.0, 0.5 * p2.tau) ==
          Approx(4.0 * ponderomotive_profile(p, ctx, 80.0, 0.5 * p.tau))
              .epsilon(1e-12));
    PulseSpec p3 = PulseSpec::from_cycles(1.0, 1600.0, 10, 160.0, 0.0);
    CHECK(ponderomotive_profile(p3, ctx, 80.0, 0.5 * p3.tau) ==
          Approx(4.0 * ponderomotive_profile(p, ctx, 80.0, 0.5 * p.tau))
              .epsilon(1e-12));
  }
}

TEST_CASE("excitation wrapper") {
  PhysicalContext ctx;
  Grid g(-100.0, 0.05, 8001, 400, 7600);  // region II (-80, 280)

  SECTION("switched barrier") {
    Excitation e = Excitation::switched_barrier({0.06, 160.0, 0.0},
                                                {5.0, std::nullopt, 5.0});
    CHECK(e.kind == Excitation::Kind::scalar_barrier);
    CHECK_FALSE(e.velocity_gauge());
    CHECK(e.end_time() == std::numeric_limits<double>::infinity());
    CHECK_NOTHROW(e.check_inside_region2(g));
    CHECK(e.potential_energy(ctx, 80.0, 100.0) == Approx(0.06));
    CHECK(e.potential_energy(ctx, 80.0, 2.5) == Approx(0.03));
  }

  SECTION("laser pulse") {
    Excitation e = Excitation::laser(PulseSpec::from_cycles(1.0, 800.0, 10, 160.0, 0.0));
    CHECK(e.velocity_gauge());
    CHECK(e.end_time() == Approx(26.6852).epsilon(1e-4));
    CHECK_NOTHROW(e.check_inside_region2(g));
    CHECK(e.vector_potential_at(80.0, 13.0) ==
          Approx(vector_potential(e.pulse, 80.0, 13.0)));
  }

  SECTION("support outside region II is rejected") {
    Excitation e = Excitation::laser(
        PulseSpec::from_cycles(1.0, 800.0, 10, 400.0, 0.0));
    CHECK_THROWS_AS(e.check_inside_region2(g), std::invalid_argument);
  }
}
