#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "drivegym/c_api.h"
#include "drivegym/config.hpp"
#include "drivegym/env.hpp"

using namespace drivegym;

TEST_CASE("make exposes the action spaces")
{
    const dg_handle s = dg_make("series-cont-v0", nullptr);
    REQUIRE(s > 0);
    CHECK(dg_action_mode(s) == 1);
    CHECK(dg_action_channels(s) == 1);
    CHECK(dg_action_low(s) == 0.0);
    CHECK(dg_action_high(s) == 1.0);
    dg_close(s);

    const dg_handle p = dg_make("pmsm-disc-v0", "{}");
    REQUIRE(p > 0);
    CHECK(dg_action_mode(p) == 0);
    CHECK(dg_action_cardinality(p) == 8);
    dg_close(p);
}

TEST_CASE("configuration errors cross the boundary")
{
    CHECK(dg_make("series-cont-v0", R"({"safety_margn": 1.2})") == 0);
    CHECK(std::string(dg_last_error()).find("safety_margn") != std::string::npos);
    CHECK(dg_make("series-turbo-v0", nullptr) == 0);
    CHECK(dg_make(nullptr, "[1, 2]") == 0);
}

TEST_CASE("closed handles fail cleanly and double close is a no-op")
{
    const dg_handle h = dg_make("series-cont-v0", nullptr);
    std::vector<double> obs(dg_observation_size(h));
    CHECK(dg_reset(h, 1, 3, obs.data(), obs.size()) == DG_OK);
    dg_close(h);
    dg_close(h);
    CHECK(dg_reset(h, 1, 3, obs.data(), obs.size()) == DG_INVALID_HANDLE);
    double reward = 0.0;
    int done = 0;
    const double duty[] = {0.5};
    CHECK(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), &reward, &done, nullptr) == DG_INVALID_HANDLE);
    CHECK(dg_observation_size(h) == 0);
    CHECK(dg_action_mode(h) == -1);
}

TEST_CASE("scripted rollout through the boundary equals the native rollout")
{
    const char* json = R"({"episode_length": 1000, "seed": 17})";
    const dg_handle h = dg_make("series-cont-v0", json);
    REQUIRE(h > 0);
    auto cfg = config_from_id("series-cont-v0");
    cfg.episode_length = 1000;
    cfg.seed = 17;
    Environment native(cfg);

    std::vector<double> obs(dg_observation_size(h));
    REQUIRE(obs.size() == native.observation_size());
    REQUIRE(dg_reset(h, 1, 2024, obs.data(), obs.size()) == DG_OK);
    CHECK(obs == native.reset(2024));

    std::mt19937_64 script(1);
    std::uniform_real_distribution<double> duty_dist(-0.2, 1.2);
    for (int k = 0; k < 1000; ++k) {
        const double duty[] = {duty_dist(script)};
        double reward = 0.0;
        int done = 0, violated = 0;
        REQUIRE(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), &reward, &done, &violated) == DG_OK);
        const auto r = native.step(Action{StateVec{duty[0]}});
        REQUIRE(obs == r.observation);
        REQUIRE(reward == r.reward);
        REQUIRE((done != 0) == r.done);
        REQUIRE(violated == (r.info.violated_entry ? static_cast<int>(*r.info.violated_entry) : -1));
        if (done) break;
    }
    const double duty[] = {0.1};
    CHECK(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), nullptr, nullptr, nullptr) == DG_USAGE_ERROR);
    dg_close(h);
}

TEST_CASE("unseeded resets follow the configured seed stream")
{
    const dg_handle h = dg_make("pmsm-disc-v0", R"({"seed": 5, "episode_length": 20})");
    auto cfg = config_from_id("pmsm-disc-v0");
    cfg.seed = 5;
    cfg.episode_length = 20;
    Environment native(cfg);
    std::vector<double> obs(dg_observation_size(h));
    for (int e = 0; e < 3; ++e) {
        REQUIRE(dg_reset(h, 0, 0, obs.data(), obs.size()) == DG_OK);
        CHECK(obs == native.reset());
        for (int k = 0; k < 20; ++k) {
            double reward = 0.0;
            int done = 0;
            REQUIRE(dg_step_discrete(h, k % 8, obs.data(), obs.size(), &reward, &done, nullptr) == DG_OK);
            const auto r = native.step(Action{k % 8});
            REQUIRE(obs == r.observation);
            REQUIRE(reward == r.reward);
            if (done) break;
        }
    }
    dg_close(h);
}

TEST_CASE("pmsm current tracking observation length")
{
    const char* json = R"({"prediction_horizon": 2,
        "reward_weights": {"omega": 0, "i_a": 0.3333333333333333, "i_b": 0.3333333333333333,
                           "i_c": 0.3333333333333334}})";
    const dg_handle h = dg_make("pmsm-cont-v0", json);
    REQUIRE(h > 0);
    CHECK(dg_observation_size(h) == 16);
    std::vector<double> small(4);
    CHECK(dg_reset(h, 1, 1, small.data(), small.size()) == DG_BUFFER_TOO_SMALL);
    dg_close(h);
}

TEST_CASE("violations propagate with the penalty")
{
    const char* json = R"({"limit_penalty": "q_based", "gamma": 0.9, "nominal_values": {"i": 2.0},
                            "converter": "4QC"})";
    const dg_handle h = dg_make("series-cont-v0", json);
    REQUIRE(h > 0);
    std::vector<double> obs(dg_observation_size(h));
    REQUIRE(dg_reset(h, 1, 8, obs.data(), obs.size()) == DG_OK);
    double reward = 0.0;
    int done = 0, violated = -1;
    const double duty[] = {1.0};
    for (int k = 0; k < 1000 && !done; ++k) {
        REQUIRE(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), &reward, &done, &violated) == DG_OK);
    }
    CHECK(done == 1);
    CHECK(violated >= 0);
    CHECK(reward == doctest::Approx(-10.0));
    CHECK(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), &reward, &done, &violated) == DG_USAGE_ERROR);
    dg_close(h);
}

TEST_CASE("invalid actions are input errors")
{
    const dg_handle h = dg_make("series-disc-v0", nullptr);
    std::vector<double> obs(dg_observation_size(h));
    dg_reset(h, 1, 1, obs.data(), obs.size());
    CHECK(dg_step_discrete(h, 7, obs.data(), obs.size(), nullptr, nullptr, nullptr) == DG_INPUT_ERROR);
    const double duty[] = {0.5};
    CHECK(dg_step_continuous(h, duty, 1, obs.data(), obs.size(), nullptr, nullptr, nullptr) == DG_INPUT_ERROR);
    dg_close(h);
}
