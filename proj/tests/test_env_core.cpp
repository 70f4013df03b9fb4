#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "drivegym/config.hpp"
#include "drivegym/env.hpp"
#include "drivegym/errors.hpp"

using namespace drivegym;

namespace {

EnvConfig series_cfg(std::size_t length = 200)
{
    EnvConfig cfg = config_from_id("series-cont-v0");
    cfg.episode_length = length;
    return cfg;
}

double random_in(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

TEST_CASE("normalize examples")
{
    CHECK(normalize(239.2, 368.0, 1.3) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normalize(1.3 * 368.0, 368.0, 1.3) == 1.0);
    CHECK(normalize(0.0, 368.0, 1.3) == 0.0);
}

TEST_CASE("reward examples")
{
    const double one[] = {1.0};
    const double w1[] = {1.0};
    const double w2[] = {2.0};
    const double s1[] = {0.3};
    for (auto kind : {RewardFunction::Wsae, RewardFunction::Wsse}) CHECK(reward(s1, s1, w1, w2, kind) == 0.0);
    for (auto kind : {RewardFunction::Swsae, RewardFunction::Swsse}) CHECK(reward(s1, s1, w1, w2, kind) == 1.0);

    const double minus_one[] = {-1.0};
    CHECK(reward(one, minus_one, w1, w2, RewardFunction::Wsae) == -1.0);

    const double s[] = {1.0, 0.2};
    const double r[] = {0.0, 0.2};
    const double w[] = {0.5, 0.5};
    const double widths[] = {2.0, 1.0};
    CHECK(reward(s, r, w, widths, RewardFunction::Wsse) == doctest::Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("reward properties over random cases")
{
    std::mt19937_64 rng(77);
    for (int n = 0; n < 10000; ++n) {
        const std::size_t dim = 1 + rng() % 7;
        std::vector<double> s(dim), r(dim), w(dim), widths(dim);
        double wsum = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const bool nonneg = rng() % 2 == 0;
            widths[k] = nonneg ? 1.0 : 2.0;
            s[k] = random_in(rng, nonneg ? 0.0 : -1.0, 1.0);
            r[k] = random_in(rng, nonneg ? 0.0 : -1.0, 1.0);
            w[k] = rng() % 3 == 0 ? 0.0 : random_in(rng, 0.0, 1.0);
            wsum += w[k];
        }
        if (wsum == 0.0) {
            w[0] = 1.0;
            wsum = 1.0;
        }
        for (double& x : w) x /= wsum;

        const double wsae = reward(s, r, w, widths, RewardFunction::Wsae);
        const double wsse = reward(s, r, w, widths, RewardFunction::Wsse);
        const double swsae = reward(s, r, w, widths, RewardFunction::Swsae);
        const double swsse = reward(s, r, w, widths, RewardFunction::Swsse);
        REQUIRE(wsae >= -1.0 - 1e-12);
        REQUIRE(wsae <= 0.0);
        REQUIRE(wsse >= -1.0 - 1e-12);
        REQUIRE(wsse <= 0.0);
        REQUIRE(swsae >= -1e-12);
        REQUIRE(swsae <= 1.0);
        REQUIRE(swsse >= -1e-12);
        REQUIRE(swsse <= 1.0);
        REQUIRE(swsae == doctest::Approx(wsae + 1.0).epsilon(1e-12));
        REQUIRE(swsse == doctest::Approx(wsse + 1.0).epsilon(1e-12));

        // zero-weight entries never matter
        auto s2 = s;
        for (std::size_t k = 0; k < dim; ++k) {
            if (w[k] == 0.0) s2[k] = random_in(rng, -1.0, 1.0);
        }
        REQUIRE(reward(s2, r, w, widths, RewardFunction::Wsae) == wsae);
    }
}

TEST_CASE("reward strictly decreases with the error")
{
    const double w[] = {1.0};
    const double width[] = {2.0};
    const double ref[] = {0.1};
    for (auto kind : {RewardFunction::Wsae, RewardFunction::Wsse, RewardFunction::Swsae, RewardFunction::Swsse}) {
        double prev = 2.0;
        for (int k = 0; k <= 100; ++k) {
            const double s[] = {0.1 + 0.009 * k};
            const double v = reward(s, ref, w, width, kind);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("limit check")
{
    const double limits[] = {1.2 * 50.0};
    const double over[] = {60.1};
    CHECK(limit_check(over, limits).value() == 0);
    const double at[] = {60.0};
    CHECK_FALSE(limit_check(at, limits).has_value());
    const double at_neg[] = {-60.0};
    CHECK_FALSE(limit_check(at_neg, limits).has_value());

    EnvConfig cfg = config_from_id("pmsm-cont-v0");
    Environment env(cfg);
    const auto& lim = env.limits();
    std::vector<double> state(lim.size());
    for (std::size_t k = 0; k < state.size(); ++k) state[k] = std::isinf(lim[k]) ? 6.0 : lim[k];
    CHECK_FALSE(limit_check(state, lim).has_value());
    CHECK(std::isinf(lim[cfg.entry_index("epsilon")]));
    CHECK(std::isinf(lim[cfg.entry_index("u_sup")]));
}

TEST_CASE("violation penalties")
{
    CHECK(violation_penalty({PenaltyMode::QBased, -1.0, 0.99}) == doctest::Approx(-100.0).epsilon(1e-12));
    CHECK(violation_penalty({PenaltyMode::QBased, -1.0, 0.9}) == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(violation_penalty({PenaltyMode::QBased, -1.0, 0.5}) == -2.0);
    CHECK(violation_penalty({PenaltyMode::Zero, -1.0, 0.9}) == 0.0);
    CHECK(violation_penalty({PenaltyMode::Constant, -3.5, 0.9}) == -3.5);
    CHECK_THROWS_AS(violation_penalty({PenaltyMode::QBased, -1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(violation_penalty({PenaltyMode::QBased, -1.0, 0.0}), ConfigError);
}

TEST_CASE("noise statistics")
{
    Rng rng(123);
    std::vector<double> zeros(3, 0.5);
    const std::vector<double> none(3, 0.0);
    add_noise(zeros, none, 1.3, rng);
    for (double v : zeros) CHECK(v == 0.5);

    const auto sample_var = [&](double rho, double xi) {
        const int n = 1'000'000;
        double s = 0.0, s2 = 0.0;
        std::vector<double> one(1);
        const std::vector<double> level{rho};
        for (int k = 0; k < n; ++k) {
            one[0] = 0.0;
            add_noise(one, level, xi, rng);
            s += one[0];
            s2 += one[0] * one[0];
        }
        const double mean = s / n;
        return s2 / n - mean * mean;
    };
    CHECK(std::sqrt(sample_var(0.06, 1.0)) == doctest::Approx(0.1).epsilon(0.01));
    CHECK(sample_var(0.06, 2.0) == doctest::Approx(0.0025).epsilon(0.02));
}

TEST_CASE("reset is reproducible and in range")
{
    Environment a(series_cfg());
    Environment b(series_cfg());
    const auto oa = a.reset(42);
    const auto ob = b.reset(42);
    CHECK(oa == ob);
    CHECK(a.references().values == b.references().values);
    CHECK(a.references().length() == 200 + 1);

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        for (const char* id : {"series-cont-v0", "extex-disc-v0", "shunt-cont-v0", "permex-disc-v0", "pmsm-cont-v0"}) {
            auto cfg = config_from_id(id);
            cfg.episode_length = 50;
            Environment env(cfg);
            const auto obs = env.reset(seed);
            for (std::size_t k = 0; k < obs.size(); ++k) {
                const bool nonneg = k < cfg.entry_count() && env.nonnegative()[k];
                REQUIRE(obs[k] <= 1.0);
                REQUIRE(obs[k] >= (nonneg ? 0.0 : -1.0));
            }
        }
    }
}

TEST_CASE("observation layout")
{
    EnvConfig cfg = config_from_id("pmsm-cont-v0");
    cfg.prediction_horizon = 2;
    std::fill(cfg.reward_weights.begin(), cfg.reward_weights.end(), 0.0);
    for (const char* e : {"i_a", "i_b", "i_c"}) cfg.reward_weights[cfg.entry_index(e)] = 1.0 / 3.0;
    cfg.episode_length = 20;
    Environment env(cfg);
    const auto obs = env.reset(1);
    CHECK(obs.size() == 16);
    CHECK(env.observation_size() == 16);

    // entry-major: (i*_a,t, i*_a,t+1, i*_b,t, ...)
    const auto& refs = env.references().values;
    CHECK(obs[10] == refs[2][0]);
    CHECK(obs[11] == refs[2][1]);
    CHECK(obs[12] == refs[3][0]);
    CHECK(obs[15] == refs[4][1]);

    const auto r = env.step(Action{StateVec{0.1, -0.2, 0.1}});
    CHECK(r.observation[10] == refs[2][1]);
    CHECK(r.observation[11] == refs[2][2]);
}

TEST_CASE("equilibrium step gives the maximal shifted reward")
{
    EnvConfig cfg = series_cfg(10);
    cfg.load = LoadParams{0.0, 0.0, 0.0, 1.0};
    cfg.zero_reference[0] = true;
    Environment env(cfg);
    env.reset(3);
    env.set_motor_state(StateVec{0.0, 0.0});
    for (int k = 0; k < 5; ++k) {
        const auto r = env.step(Action{StateVec{0.0}});
        CHECK(r.reward == 1.0);
        CHECK(env.motor_state()[0] == 0.0);
        CHECK(env.motor_state()[1] == 0.0);
    }
}

TEST_CASE("violation ends the episode with the penalty in the same step")
{
    EnvConfig cfg = series_cfg(100);
    cfg.penalty = {PenaltyMode::QBased, -1.0, 0.9};
    Environment env(cfg);
    env.reset(5);
    env.set_motor_state(StateVec{2.0 * cfg.safety_margin * cfg.nominal_values[2], 0.0});
    const auto r = env.step(Action{StateVec{0.0}});
    CHECK(r.done);
    CHECK(r.reward == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(r.info.violated_entry.has_value());
    CHECK_THROWS_AS(env.step(Action{StateVec{0.0}}), UsageError);
}

TEST_CASE("episode length and usage errors")
{
    Environment env(series_cfg(25));
    CHECK_THROWS_AS(env.step(Action{StateVec{0.0}}), UsageError);
    env.reset(9);
    env.set_motor_state(StateVec{0.0, 0.0});
    CHECK_THROWS_AS(env.step(Action{3}), InputError);
    CHECK_THROWS_AS(env.step(Action{StateVec{0.1, 0.2}}), InputError);
    CHECK_THROWS_AS(env.step(Action{StateVec{NAN}}), InputError);
    std::size_t steps = 0;
    bool done = false;
    while (!done) {
        done = env.step(Action{StateVec{0.0}}).done;
        ++steps;
    }
    CHECK(steps == 25);
    CHECK_THROWS_AS(env.step(Action{StateVec{0.0}}), UsageError);

    Environment disc(config_from_id("series-disc-v0"));
    disc.reset(1);
    CHECK_THROWS_AS(disc.step(Action{2}), InputError);
    CHECK_THROWS_AS(disc.step(Action{StateVec{0.5}}), InputError);
}

TEST_CASE("environment is a deterministic function of seed and actions")
{
    for (const char* id : {"series-cont-v0", "extex-cont-v0", "pmsm-disc-v0"}) {
        auto cfg = config_from_id(id);
        cfg.episode_length = 300;
        Environment a(cfg), b(cfg);
        std::mt19937_64 ra(5), rb(5);
        a.reset(11);
        b.reset(11);
        const auto& space = a.action_space();
        while (!a.done()) {
            Action act;
            if (space.mode == ActionMode::Discrete) {
                act = static_cast<int>(ra() % static_cast<unsigned>(space.cardinality));
                (void)rb();
            } else {
                StateVec d(space.channels);
                for (auto& x : d) {
                    x = std::uniform_real_distribution<double>(space.low, space.high)(ra);
                    (void)rb();
                }
                act = d;
            }
            const auto x = a.step(act);
            const auto y = b.step(act);
            REQUIRE(x.observation == y.observation);
            REQUIRE(x.reward == y.reward);
            REQUIRE(x.done == y.done);
        }
    }
}

TEST_CASE("measurement noise leaves the dynamics untouched, input noise does not")
{
    EnvConfig clean = series_cfg(100);
    EnvConfig measured = clean;
    measured.noise_levels[0] = 0.05;
    measured.noise_levels[2] = 0.05;
    EnvConfig input = clean;
    input.noise_levels[clean.entry_index("u")] = 0.05;

    Environment a(clean), b(measured), c(input);
    a.reset(4);
    b.reset(4);
    c.reset(4);
    bool obs_differs = false;
    bool state_differs = false;
    for (int k = 0; k < 100; ++k) {
        const Action act{StateVec{0.4}};
        const auto ra = a.step(act);
        const auto rb = b.step(act);
        const auto rc = c.step(act);
        REQUIRE(ra.info.raw_state == rb.info.raw_state);
        REQUIRE(ra.reward == rb.reward);
        if (ra.observation[0] != rb.observation[0]) obs_differs = true;
        if (ra.info.raw_state != rc.info.raw_state) state_differs = true;
        // voltage entries carry no measurement noise
        REQUIRE(rc.observation[3] == rc.info.norm_state[3]);
    }
    CHECK(obs_differs);
    CHECK(state_differs);
}

TEST_CASE("dead time delays the applied voltage by one step")
{
    EnvConfig cfg = series_cfg(10);
    cfg.converter.dead_time = true;
    Environment env(cfg);
    env.reset(2);
    CHECK(env.step(Action{StateVec{0.5}}).info.applied_voltage[0] == 0.0);
    CHECK(env.step(Action{StateVec{0.25}}).info.applied_voltage[0] == 210.0);
    CHECK(env.step(Action{StateVec{0.25}}).info.applied_voltage[0] == 105.0);
}

TEST_CASE("configuration ids and validation")
{
    const auto s = config_from_id("series-cont-v0");
    CHECK(s.converter.topology == Topology::OneQuadrant);
    CHECK(s.tau() == 1e-4);
    CHECK(s.nominal_values[0] == 368.0);
    CHECK(s.nominal_values[2] == 50.0);
    CHECK(s.converter.u_sup == 420.0);
    CHECK(env_id(s) == "series-cont-v0");
    CHECK(config_from_id("pmsm-disc-v0").converter.topology == Topology::B6);
    CHECK_THROWS_AS(config_from_id("series-fast-v0"), ConfigError);
    CHECK_THROWS_AS(config_from_id("stepper-cont-v0"), ConfigError);

    EnvConfig bad = s;
    bad.converter.topology = Topology::B6;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.converter.interlocking_time = 1e-4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.safety_margin = 0.9;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    EnvConfig split = s;
    split.reward_weights[2] = 0.5;
    CHECK_FALSE(split.validate().empty());
    CHECK(s.validate().empty());
}

TEST_CASE("json configuration round trip and unknown keys")
{
    auto cfg = config_from_id("extex-disc-v0");
    cfg.noise_levels[1] = 0.02;
    cfg.penalty = {PenaltyMode::Constant, -2.0, 0.95};
    cfg.prediction_horizon = 3;
    cfg.converter.dead_time = true;
    cfg.integrator.method = IntegratorMethod::DormandPrince;
    cfg.reference.shape_probabilities = {0.2, 0.2, 0.2, 0.2, 0.2};
    cfg.seed = 99;
    const auto text = config_to_json(cfg);
    const auto back = config_from_json(text);
    CHECK(config_to_json(back) == text);

    try {
        config_from_json(R"({"env_id": "series-cont-v0", "taux": 1e-4})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("taux") != std::string::npos);
    }
    try {
        config_from_json(R"({"env_id": "series-cont-v0", "reference": {"shape_probs": [1,0,0,0,0]}})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("shape_probs") != std::string::npos);
    }
    try {
        config_from_json(R"({"env_id": "series-cont-v0", "reward_weights": {"theta": 1}})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
    CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}
