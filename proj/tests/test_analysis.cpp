#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace fwm;
using test::DeskParams;
using test::desk;

namespace
{
SystemConfig above_threshold(DeskParams p, double multiple)
{
    SystemConfig cfg = desk(p);
    return test::with_flux(cfg, multiple * oscillation_threshold(cfg).flux_threshold);
}

FieldState pump_only_state(const SystemConfig &cfg) { return {pump_only_steady_state(cfg), {}, {}, 0.0}; }
}  // namespace

TEST_CASE("pump-only steady state")
{
    DeskParams p;
    p.g = 0.0;
    CHECK(pump_only_steady_state(desk(p)) == cplx{});

    p.gamma0 = 2.0;
    p.in_fraction = 0.5;
    p.flux = 3.0;
    CHECK(std::norm(pump_only_steady_state(desk(p))) == doctest::Approx(3.0 / 2.0).epsilon(1e-14));

    p.delta0 = 1.3;
    p.in_fraction = 0.2;
    const SystemConfig cfg = desk(p);
    SolverOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    const FieldState end = integrate(FieldState{}, cfg, 40.0, opts).back();
    CHECK(test::rel_diff(end.alpha0, pump_only_steady_state(cfg)) < 1e-9);
}

TEST_CASE("steady state below threshold")
{
    DeskParams p;
    p.delta0 = 0.4;
    p.delta_minus = 0.3;
    p.seed.epsilon = 1e-5;
    const SystemConfig cfg = above_threshold(p, 0.5);
    const SteadyState ss = steady_state(cfg, pump_only_state(cfg));
    CHECK(ss.converged);
    CHECK_FALSE(ss.oscillating);
    CHECK(ss.pulling == 0.0);
    CHECK(std::abs(ss.state.alpha_minus) < 10.0 * std::abs(p.seed.epsilon));
    CHECK(std::abs(ss.state.alpha_plus) < 10.0 * std::abs(p.seed.epsilon));
    CHECK(test::rel_diff(ss.state.alpha0, pump_only_steady_state(cfg)) < 1e-3);
}

TEST_CASE("steady state with g = 0 sits at the seed-supported level")
{
    DeskParams p;
    p.g = 0.0;
    p.flux = 5.0;
    p.delta_minus = 0.7;
    p.seed.epsilon = {2e-3, 1e-3};
    const SystemConfig cfg = desk(p);
    const SteadyState ss = steady_state(cfg, FieldState{});
    CHECK(ss.converged);
    CHECK_FALSE(ss.oscillating);
    const double gm = cfg.idler.gamma_total();
    CHECK(test::rel_diff(ss.state.alpha_minus, gm * p.seed.epsilon / cplx(gm, cfg.delta_idler())) < 1e-10);
    CHECK(ss.state.alpha_plus == cplx{});
}

TEST_CASE("steady state above threshold")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 8; ++i)
    {
        DeskParams p;
        p.ratio = 5.0 + 3.0 * u(rng);
        p.delta0 = u(rng);
        p.delta_minus = 0.5 * u(rng);
        p.g = std::polar(1.0, u(rng));
        const SystemConfig cfg = above_threshold(p, 2.0 + u(rng));
        const SteadyState ss = steady_state(cfg, pump_only_state(cfg));
        REQUIRE(ss.converged);
        REQUIRE(ss.oscillating);
        const double lhs = cfg.idler.gamma_total() * std::norm(ss.state.alpha_minus);
        const double rhs = cfg.signal.gamma_total() * std::norm(ss.state.alpha_plus);
        CHECK(test::rel_diff(lhs, rhs) < 1e-6);
        // Idler gauge and pulling.
        CHECK(ss.state.alpha_minus.imag() == 0.0);
        const double gm = cfg.idler.gamma_total(), gp = cfg.signal.gamma_total();
        const double nu = (gm * cfg.delta_signal() - gp * cfg.delta_idler()) / (gm + gp);
        CHECK(ss.pulling == doctest::Approx(angular_to_hz(nu)).epsilon(1e-8));
        CHECK(ss.residual < 1e-9);
    }
}

TEST_CASE("linearized sideband matrix")
{
    DeskParams p;
    p.delta_minus = 0.3;
    p.delta0 = 0.5;
    const SystemConfig cfg = desk(p);
    const Matrix2c m0 = linearized_sideband_matrix(0.0, cfg);
    CHECK(m0.b == cplx{});
    CHECK(m0.c == cplx{});
    CHECK(m0.a == -cplx(cfg.idler.gamma_total(), cfg.delta_idler()));
    CHECK(m0.d == -cplx(cfg.signal.gamma_total(), -cfg.delta_signal()));

    const auto ev = eigenvalues(Matrix2c{{1.0, 2.0}, {0.5, -1.0}, {3.0, 0.0}, {-2.0, 0.5}});
    for (const cplx l : ev)
    {
        const cplx det = (cplx{1.0, 2.0} - l) * (cplx{-2.0, 0.5} - l) - cplx{0.5, -1.0} * cplx{3.0, 0.0};
        CHECK(std::abs(det) < 1e-12);
    }
}

TEST_CASE("eigenvalue crossing on resonance")
{
    DeskParams p;
    p.ratio = 7.0;
    p.g = std::polar(0.6, 1.0);
    const SystemConfig cfg = desk(p);
    const double a0sq = std::sqrt(1.0 * 7.0) / 0.6;
    const cplx a0 = std::polar(std::sqrt(a0sq), 0.3);
    CHECK(std::abs(sideband_growth_rate(a0, cfg)) < 1e-13);
    CHECK(sideband_growth_rate(a0 * 1.01, cfg) > 0.0);
    CHECK(sideband_growth_rate(a0 * 0.99, cfg) < 0.0);

    const ThresholdResult th = oscillation_threshold(cfg);
    const double a0sq_th = std::norm(pump_only_steady_state(test::with_flux(cfg, th.flux_threshold)));
    CHECK(0.6 * a0sq_th == doctest::Approx(std::sqrt(7.0)).epsilon(1e-11));
    CHECK(th.criterion == ThresholdCriterion::EigenvalueCrossing);
    CHECK(th.below < th.above);
    CHECK(th.power_threshold == th.above);
    CHECK(th.flux_threshold == doctest::Approx(pump_photon_flux({th.power_threshold, cfg.drive.frequency, 0.0})));
}

TEST_CASE("eigenvalue sign predicts growth or decay of simulated sidebands")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 6; ++i)
    {
        DeskParams p;
        p.ratio = 4.0 + 2.0 * u(rng);
        p.delta0 = u(rng);
        p.delta_minus = 0.5 * u(rng);
        p.seed.mode = SeedMode::None;
        const SystemConfig cfg = above_threshold(p, i % 2 ? 0.6 : 1.8);
        const cplx a0 = pump_only_steady_state(cfg);
        const double rate = sideband_growth_rate(a0, cfg);
        FieldState init{a0, {1e-9, 0.0}, {}, 0.0};
        const FieldState end = integrate(init, cfg, 15.0).back();
        CHECK((rate > 0.0) == (std::abs(end.alpha_minus) > 1e-9));
    }
}

TEST_CASE("threshold closed forms")
{
    SUBCASE("doubling gamma- doubles the threshold gain on resonance")
    {
        DeskParams p;
        p.ratio = 50.0;
        const SystemConfig a = desk(p);
        p.gamma_minus = 2.0;
        p.ratio = 25.0;  // same gamma+
        const SystemConfig b = desk(p);
        auto gain = [](const SystemConfig &c) {
            const double n = std::norm(pump_only_steady_state(test::with_flux(c, oscillation_threshold(c).flux_threshold)));
            return std::norm(c.g) * n * n;
        };
        CHECK(gain(b) / gain(a) == doctest::Approx(2.0).epsilon(1e-10));
    }

    SUBCASE("off resonance the adiabatic closed form holds to order gamma-/gamma+")
    {
        DeskParams p;
        p.ratio = 1e3;
        p.delta0 = 30.0;
        const SystemConfig a = desk(p);
        const double n = std::norm(pump_only_steady_state(test::with_flux(a, oscillation_threshold(a).flux_threshold)));
        const double gp = a.signal.gamma_total(), dp = a.delta_signal();
        const double closed = 1.0 * (gp * gp + dp * dp) / gp;
        CHECK(test::rel_diff(n * n, closed) < 5e-3);
        // Exact crossing including the finite signal linewidth.
        const double exact = 1.0 * gp * (1.0 + std::pow(2.0 * p.delta0 / (gp + 1.0), 2));
        CHECK(test::rel_diff(n * n, exact) < 1e-11);
    }
}

TEST_CASE("threshold criteria agree")
{
    DeskParams p;
    p.delta0 = 0.5;
    p.delta_minus = 0.2;
    const SystemConfig cfg = desk(p);
    const ThresholdResult ec = oscillation_threshold(cfg);
    const ThresholdResult so = oscillation_threshold(cfg, ThresholdCriterion::SimulatedOnset);
    CHECK(test::rel_diff(ec.power_threshold, so.power_threshold) < 0.01);
    CHECK(to_string(so.criterion) == "simulated_onset");

    ThresholdOptions narrow;
    narrow.power_max = ec.power_threshold * 0.5;
    CHECK_THROWS_AS(oscillation_threshold(cfg, ThresholdCriterion::EigenvalueCrossing, narrow), AnalysisError);
}

TEST_CASE("effective nonlinearity forms")
{
    const cplx g = std::polar(2.0, 0.7);
    CHECK(effective_nonlinearity_printed(g, 30.0, 1.5, 0.0) == doctest::Approx(2.0 / 1.5));
    CHECK(effective_nonlinearity_printed(g, 30.0, 1.5, 40.0) == doctest::Approx(2.0 * 20.0 / 50.0));
    CHECK(effective_nonlinearity_derived(g, 30.0, 1.5, 0.0) == doctest::Approx(4.0 / (1.5 * 30.0)));

    DeskParams p;
    p.ratio = 40.0;
    p.g = g;
    const SystemConfig cfg = desk(p);
    const double n = std::norm(pump_only_steady_state(test::with_flux(cfg, oscillation_threshold(cfg).flux_threshold)));
    const double gd = effective_nonlinearity_derived(g, cfg.signal.gamma_total(), cfg.idler.gamma_total(),
                                                     cfg.delta_signal());
    CHECK(gd * n * n == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("effective nonlinearity from threshold power")
{
    // Hand arithmetic: (3^2 + 4^2) / (2 * 1.25) * hbar * 100 / 2e-30 = 10 * hbar * 5e31.
    const double v = effective_nonlinearity_from_threshold(3.0, 4.0, 1.25, 100.0, 2e-30);
    CHECK(v == doctest::Approx(10.0 * 1.054571817e-34 * 5e31).epsilon(1e-15));
    CHECK(effective_nonlinearity_from_threshold(3.0, 4.0, 1.25, 100.0, 4e-30) == doctest::Approx(v / 2.0));
    CHECK(effective_nonlinearity_from_threshold(3.0, 0.0, 1.25, 100.0, 2e-30) ==
          doctest::Approx(9.0 * kHbar * 100.0 / (2.5 * 2e-30)));
    CHECK_THROWS_AS(effective_nonlinearity_from_threshold(3.0, 4.0, 1.25, 100.0, 0.0), AnalysisError);
}

TEST_CASE("output power")
{
    const ModeParams m = test::raw_mode(1000.0, 2.0, 0.5, ModeRole::Pump);
    CHECK(output_power(0.0, m) == 0.0);
    CHECK(output_power(std::sqrt(2.0) * cplx(0.3, 0.4), m) == doctest::Approx(2.0 * output_power({0.3, 0.4}, m)));

    // Lossless, symmetric coupling, on resonance: everything comes back out.
    ModeParams lossless = m;
    lossless.gamma_in = lossless.gamma_out = 1.0;
    lossless.gamma_intrinsic = 0.0;
    SystemConfig cfg = desk({});
    cfg.pump = lossless;
    cfg.g = 0.0;
    cfg.drive = {1e-30, lossless.omega, 0.4};
    CHECK(output_power(pump_only_steady_state(cfg), cfg.pump) == doctest::Approx(1e-30).epsilon(1e-14));
}

TEST_CASE("frequency extraction")
{
    Trajectory synth;
    for (int i = 0; i <= 1000; ++i)
    {
        const double t = i * 1e-3;
        synth.samples.push_back({1.0, std::exp(cplx(0.0, 2.0 * M_PI * 10.0 * t)), 0.0, t});
    }
    CHECK(extract_frequency_offset(synth, ModeRole::Idler) == doctest::Approx(10.0).epsilon(1e-12));
    FrequencyWindow w;
    w.amplitude_floor = 0.5;
    CHECK_THROWS_AS(extract_frequency_offset(synth, ModeRole::Signal, w), AnalysisError);

    DeskParams p;
    p.delta0 = 0.6;
    p.delta_minus = 0.2;
    p.seed.epsilon = 1e-4;
    const SystemConfig cfg = above_threshold(p, 2.5);
    SolverOptions opts;
    opts.n_samples = 4000;
    const Trajectory traj = integrate(FieldState{}, cfg, 400.0, opts);
    const double fi = extract_frequency_offset(traj, ModeRole::Idler);
    const double fs = extract_frequency_offset(traj, ModeRole::Signal);
    CHECK(std::abs(fi + fs) < 1e-3);
    const double gm = cfg.idler.gamma_total(), gp = cfg.signal.gamma_total();
    const double nu = (gm * cfg.delta_signal() - gp * cfg.delta_idler()) / (gm + gp);
    CHECK(fi == doctest::Approx(angular_to_hz(nu)).epsilon(1e-3));
}

TEST_CASE("onset delay")
{
    DeskParams p;
    p.seed = {1e-3, 0.0, SeedMode::Constant};
    SystemConfig cfg = above_threshold(p, 4.0);
    SolverOptions opts;
    opts.n_samples = 3000;
    const double floor = oscillation_floor(cfg);
    const auto fast = onset_delay(integrate(FieldState{}, cfg, 60.0, opts), 0.5, floor);
    REQUIRE(fast);
    CHECK(*fast > 0.0);
    CHECK(*fast < 10.0 / cfg.idler.gamma_total());

    p.seed = {1e-6, 2.0, SeedMode::ExponentialRamp};
    std::vector<double> delays;
    for (const double m : {1.3, 1.6, 2.5})
    {
        cfg = above_threshold(p, m);
        const auto d = onset_delay(integrate(FieldState{}, cfg, 300.0, opts), 0.5, oscillation_floor(cfg));
        REQUIRE(d);
        delays.push_back(*d);
    }
    CHECK(delays[0] > delays[1]);
    CHECK(delays[1] > delays[2]);
    CHECK(delays[2] > 1.0);

    cfg = above_threshold(p, 0.5);
    CHECK_FALSE(onset_delay(integrate(FieldState{}, cfg, 100.0, opts), 0.5, oscillation_floor(cfg)));
}

TEST_CASE("detuning sweep")
{
    SystemConfig cfg = test::measured_scale(0.0, 10.0);
    SweepOptions so;
    so.threads = 3;
    const std::vector<double> offsets{-2000.0, -500.0, -100.0, 0.0, 100.0, 500.0, 2000.0};
    const SweepResult res = sweep_detuning(cfg, offsets, so);
    REQUIRE(res.rows.size() == offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i)
        CHECK(res.rows[i].swept == offsets[i]);

    SUBCASE("band of operation")
    {
        CHECK(res.rows[3].oscillating);
        CHECK(res.rows[3].idler_power > 0.0);
        CHECK_FALSE(res.rows.front().oscillating);
        CHECK_FALSE(res.rows.back().oscillating);
        CHECK(res.rows.back().idler_power < 1e-20);
    }

    SUBCASE("rows equal single-point evaluations")
    {
        for (std::size_t i = 0; i < offsets.size(); ++i)
        {
            const SweepRow one = evaluate_detuning_point(cfg, offsets[i], so);
            CHECK(one.idler_power == res.rows[i].idler_power);
            CHECK(one.threshold == res.rows[i].threshold);
            CHECK(one.status == res.rows[i].status);
        }
    }

    SUBCASE("symmetric doublet gives a symmetric threshold curve")
    {
        cfg.doublet = DoubletLinewidths{6.7, 6.7};
        const SweepResult sym = sweep_detuning(cfg, offsets, so);
        // Compare photon fluxes: the photon energy differs between the two sides.
        for (std::size_t i = 0; i < offsets.size() / 2; ++i)
        {
            const std::size_t j = offsets.size() - 1 - i;
            const double wi = detuning_point_config(cfg, offsets[i], so).drive.frequency;
            const double wj = detuning_point_config(cfg, offsets[j], so).drive.frequency;
            CHECK(sym.rows[i].threshold / wi == doctest::Approx(sym.rows[j].threshold / wj).epsilon(1e-9));
        }
    }

    SUBCASE("doublet rule picks the linewidth by sign")
    {
        CHECK(detuning_point_config(cfg, 10.0, so).pump.half_bandwidth_hz() == doctest::Approx(6.7));
        CHECK(detuning_point_config(cfg, -10.0, so).pump.half_bandwidth_hz() == doctest::Approx(5.0));
    }
}

TEST_CASE("power sweep")
{
    DeskParams p;
    p.delta0 = 0.3;
    const SystemConfig cfg = desk(p);
    const double th = oscillation_threshold(cfg).power_threshold;
    const std::vector<double> powers{0.5 * th, 2.0 * th, 4.0 * th};
    SweepOptions so;
    so.threads = 2;
    const SweepResult res = sweep_power(cfg, powers, so);
    REQUIRE(res.rows.size() == 3);
    CHECK_FALSE(res.rows[0].oscillating);
    CHECK(res.rows[1].oscillating);
    CHECK(res.rows[2].idler_power > res.rows[1].idler_power);
    // Gain clamping: the intracavity pump stays at its threshold value.
    CHECK(res.rows[2].pump_power == doctest::Approx(res.rows[1].pump_power).epsilon(1e-8));

    const SweepResult bad = sweep_power(cfg, {-1.0, th}, so);
    CHECK(bad.rows[0].status != "ok");
    CHECK_FALSE(bad.rows[0].converged);
    CHECK(bad.rows[1].status == "ok");
}

TEST_CASE("thread count resolution")
{
    CHECK(resolve_thread_count(3) == 3);
    CHECK(resolve_thread_count(0) >= 1);
}
