#include "drivegym/c_api.h"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "drivegym/env.hpp"
#include "drivegym/errors.hpp"

using namespace drivegym;

namespace {

thread_local std::string last_error;

std::mutex registry_mutex;
std::map<dg_handle, std::shared_ptr<Environment>> registry;
dg_handle next_handle = 1;

std::shared_ptr<Environment> lookup(dg_handle h)
{
    std::lock_guard lock(registry_mutex);
    const auto it = registry.find(h);
    return it == registry.end() ? nullptr : it->second;
}

template <class F>
int guarded(F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        last_error = e.what();
        return DG_CONFIG_ERROR;
    } catch (const NumericalError& e) {
        last_error = e.what();
        return DG_NUMERICAL_ERROR;
    } catch (const InputError& e) {
        last_error = e.what();
        return DG_INPUT_ERROR;
    } catch (const UsageError& e) {
        last_error = e.what();
        return DG_USAGE_ERROR;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DG_NUMERICAL_ERROR;
    }
}

int copy_out(const std::vector<double>& v, double* obs, std::size_t capacity)
{
    if (obs == nullptr || capacity < v.size()) {
        last_error = "observation buffer needs " + std::to_string(v.size()) + " doubles";
        return DG_BUFFER_TOO_SMALL;
    }
    std::memcpy(obs, v.data(), v.size() * sizeof(double));
    return DG_OK;
}

int finish_step(const StepResult& r, double* obs, std::size_t capacity, double* reward, int* done, int* violated)
{
    const int rc = copy_out(r.observation, obs, capacity);
    if (reward) *reward = r.reward;
    if (done) *done = r.done ? 1 : 0;
    if (violated) *violated = r.info.violated_entry ? static_cast<int>(*r.info.violated_entry) : -1;
    return rc;
}

int invalid_handle()
{
    last_error = "invalid or closed environment handle";
    return DG_INVALID_HANDLE;
}

}  // namespace

extern "C" {

dg_handle dg_make(const char* id, const char* config_json)
{
    dg_handle out = 0;
    guarded([&] {
        nlohmann::json doc = nlohmann::json::object();
        if (config_json != nullptr && *config_json != '\0') {
            try {
                doc = nlohmann::json::parse(config_json);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(std::string("invalid configuration JSON: ") + e.what());
            }
            if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
        }
        if (id != nullptr) doc["env_id"] = id;
        auto env = std::make_shared<Environment>(config_from_json(doc.dump()));
        std::lock_guard lock(registry_mutex);
        out = next_handle++;
        registry.emplace(out, std::move(env));
        return DG_OK;
    });
    return out;
}

void dg_close(dg_handle h)
{
    std::lock_guard lock(registry_mutex);
    registry.erase(h);
}

const char* dg_last_error(void) { return last_error.c_str(); }

size_t dg_observation_size(dg_handle h)
{
    const auto env = lookup(h);
    return env ? env->observation_size() : 0;
}

int dg_action_mode(dg_handle h)
{
    const auto env = lookup(h);
    if (!env) return -1;
    return env->action_space().mode == ActionMode::Discrete ? 0 : 1;
}

int dg_action_cardinality(dg_handle h)
{
    const auto env = lookup(h);
    return env ? env->action_space().cardinality : 0;
}

size_t dg_action_channels(dg_handle h)
{
    const auto env = lookup(h);
    return env ? env->action_space().channels : 0;
}

double dg_action_low(dg_handle h)
{
    const auto env = lookup(h);
    return env ? env->action_space().low : 0.0;
}

double dg_action_high(dg_handle h)
{
    const auto env = lookup(h);
    return env ? env->action_space().high : 0.0;
}

int dg_reset(dg_handle h, int has_seed, uint64_t seed, double* obs, size_t capacity)
{
    const auto env = lookup(h);
    if (!env) return invalid_handle();
    return guarded([&] {
        const auto o = env->reset(has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
        return copy_out(o, obs, capacity);
    });
}

int dg_step_continuous(dg_handle h, const double* duty, size_t n, double* obs, size_t capacity, double* reward,
                       int* done, int* violated_entry)
{
    const auto env = lookup(h);
    if (!env) return invalid_handle();
    return guarded([&] {
        if (duty == nullptr && n > 0) throw InputError("duty pointer is NULL");
        if (n > 4) throw InputError("too many action channels");
        const StateVec action(std::span<const double>(duty, n));
        return finish_step(env->step(action), obs, capacity, reward, done, violated_entry);
    });
}

int dg_step_discrete(dg_handle h, int command, double* obs, size_t capacity, double* reward, int* done,
                     int* violated_entry)
{
    const auto env = lookup(h);
    if (!env) return invalid_handle();
    return guarded([&] { return finish_step(env->step(Action{command}), obs, capacity, reward, done, violated_entry); });
}

}  // extern "C"
