#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynalgo/core.hpp"

namespace dynalgo {

using json = nlohmann::ordered_json;

struct UnitStats {
    double p50 = 0, p90 = 0, p99 = 0, mean = 0;
    std::uint64_t max = 0;

    static UnitStats of(std::vector<std::uint64_t> samples) {
        UnitStats s;
        if (samples.empty()) return s;
        std::sort(samples.begin(), samples.end());
        auto at = [&](double q) {
            std::size_t idx = std::size_t(double(samples.size()) * q);
            if (idx >= samples.size()) idx = samples.size() - 1;
            return double(samples[idx]);
        };
        s.p50 = at(0.50);
        s.p90 = at(0.90);
        s.p99 = at(0.99);
        s.max = samples.back();
        double sum = 0;
        for (auto v : samples) sum += double(v);
        s.mean = sum / double(samples.size());
        return s;
    }

    json to_json() const {
        return json{{"p50", p50}, {"p90", p90}, {"p99", p99}, {"max", max}, {"mean", mean}};
    }
};

struct RunReport {
    std::string algo;
    std::uint64_t n = 0;
    std::optional<std::uint64_t> k;
    std::uint64_t seed = 0;
    bool wrapped = false;
    std::optional<std::uint64_t> q;
    std::optional<std::uint64_t> r;
    UnitStats units;
    UnitStats units_no_flush;
    std::uint64_t flush_count = 0;
    std::string verify_mode = "none";
    std::uint64_t verify_checked = 0;
    std::uint64_t verify_failed = 0;
    std::optional<std::uint64_t> spanner_size;

    json to_json() const {
        json j;
        j["algo"] = algo;
        j["n"] = n;
        if (k) j["k"] = *k;
        j["seed"] = seed;
        j["wrapped"] = wrapped;
        if (q) j["q"] = *q;
        if (r) j["r"] = *r;
        j["units"] = units.to_json();
        j["units_no_flush"] = units_no_flush.to_json();
        j["flush_count"] = flush_count;
        j["verify"] = json{{"mode", verify_mode}, {"checked", verify_checked}, {"failed", verify_failed}};
        if (spanner_size) j["spanner_size"] = *spanner_size;
        return j;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        f << to_json().dump(2) << "\n";
    }
};

}  // namespace dynalgo
