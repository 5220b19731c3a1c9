#include "indemnity/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace indemnity {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : required) known = known || item.key() == k;
        for (const char* k : optional) known = known || item.key() == k;
        if (!known)
            throw ConfigError("config: unknown key '" + item.key() + "' in " +
                              where);
    }
    for (const char* k : required)
        if (!obj.contains(k))
            throw ConfigError("config: missing key '" + std::string(k) +
                              "' in " + where);
}

double number_at(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("config: '" + std::string(key) + "' in " + where +
                          " must be a number");
    return v.get<double>();
}

LossModel parse_loss(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(
            "config: 'loss' must be an object with a 'family' key "
            "(truncated_exponential or atom_exponential)");
    const std::string family = j.at("family").get<std::string>();
    try {
        if (family == "truncated_exponential") {
            check_keys(j, "loss", {"family", "m", "M"}, {});
            return make_truncated_exponential(number_at(j, "loss", "m"),
                                              number_at(j, "loss", "M"));
        }
        if (family == "atom_exponential") {
            check_keys(j, "loss", {"family", "gamma", "eta", "M"}, {});
            return make_atom_exponential(number_at(j, "loss", "gamma"),
                                         number_at(j, "loss", "eta"),
                                         number_at(j, "loss", "M"));
        }
    } catch (const InvalidParameter& e) {
        throw ConfigError("config: loss parameters rejected: " +
                          std::string(e.what()));
    }
    throw ConfigError("config: unknown loss family '" + family +
                      "' (expected truncated_exponential or atom_exponential)");
}

UtilitySpec parse_utility(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(
            "config: 'utility' must be an object with a 'family' key "
            "(identity, exponential, power, or log)");
    const std::string family = j.at("family").get<std::string>();
    try {
        if (family == "identity") {
            check_keys(j, "utility", {"family"}, {});
            return UtilitySpec::identity();
        }
        if (family == "exponential") {
            check_keys(j, "utility", {"family", "alpha"}, {});
            return UtilitySpec::exponential(number_at(j, "utility", "alpha"));
        }
        if (family == "power") {
            check_keys(j, "utility", {"family", "gamma"}, {});
            return UtilitySpec::power(number_at(j, "utility", "gamma"));
        }
        if (family == "log") {
            check_keys(j, "utility", {"family"}, {});
            return UtilitySpec::log_utility();
        }
    } catch (const InvalidParameter& e) {
        throw ConfigError("config: utility parameters rejected: " +
                          std::string(e.what()));
    }
    throw ConfigError("config: unknown utility family '" + family +
                      "' (expected identity, exponential, power, or log)");
}

WeightingSpec parse_weighting(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(
            "config: 'weighting' must be an object with a 'family' key "
            "(tversky_kahneman)");
    const std::string family = j.at("family").get<std::string>();
    if (family != "tversky_kahneman")
        throw ConfigError("config: unknown weighting family '" + family +
                          "' (expected tversky_kahneman)");
    check_keys(j, "weighting", {"family", "theta"}, {});
    try {
        return WeightingSpec::tversky_kahneman(number_at(j, "weighting", "theta"));
    } catch (const InvalidParameter& e) {
        throw ConfigError("config: weighting parameters rejected: " +
                          std::string(e.what()));
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, "top level", {"loss", "utility", "weighting", "wealth", "rho"},
               {"premium", "premium_grid", "tolerances", "oracle"});

    RunConfig cfg;
    cfg.loss = parse_loss(j.at("loss"));
    cfg.utility = parse_utility(j.at("utility"));
    cfg.weighting = parse_weighting(j.at("weighting"));
    cfg.W0 = number_at(j, "top level", "wealth");
    cfg.rho = number_at(j, "top level", "rho");
    if (cfg.rho < 0.0)
        throw ConfigError("config: 'rho' must be >= 0");

    const bool has_single = j.contains("premium");
    const bool has_grid = j.contains("premium_grid");
    if (has_single == has_grid)
        throw ConfigError(
            "config: provide exactly one of 'premium' (number) or "
            "'premium_grid' (non-empty array of numbers)");
    if (has_single) {
        cfg.premiums.push_back(number_at(j, "top level", "premium"));
    } else {
        const json& grid = j.at("premium_grid");
        if (!grid.is_array() || grid.empty())
            throw ConfigError(
                "config: 'premium_grid' must be a non-empty array of numbers");
        for (const json& v : grid) {
            if (!v.is_number())
                throw ConfigError(
                    "config: 'premium_grid' must contain only numbers");
            cfg.premiums.push_back(v.get<double>());
        }
        cfg.premium_is_grid = true;
    }
    for (double pi : cfg.premiums)
        if (pi < 0.0)
            throw ConfigError("config: premiums must be >= 0 (got " +
                              std::to_string(pi) + ")");

    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        check_keys(t, "tolerances", {}, {"abs", "rel", "max_iter"});
        if (t.contains("abs")) cfg.tol.abs_tol = number_at(t, "tolerances", "abs");
        if (t.contains("rel")) cfg.tol.rel_tol = number_at(t, "tolerances", "rel");
        if (t.contains("max_iter")) {
            const json& v = t.at("max_iter");
            if (!v.is_number_integer() || v.get<int>() < 1)
                throw ConfigError(
                    "config: 'max_iter' must be a positive integer");
            cfg.tol.max_iter = v.get<int>();
        }
        if (cfg.tol.abs_tol <= 0.0 || cfg.tol.rel_tol <= 0.0)
            throw ConfigError("config: tolerances must be positive");
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        check_keys(o, "oracle", {}, {"enabled", "n"});
        if (o.contains("enabled")) {
            if (!o.at("enabled").is_boolean())
                throw ConfigError("config: 'oracle.enabled' must be a boolean");
            cfg.oracle.enabled = o.at("enabled").get<bool>();
        }
        if (o.contains("n")) {
            const json& v = o.at("n");
            if (!v.is_number_integer() || v.get<int>() < 100)
                throw ConfigError("config: 'oracle.n' must be an integer >= 100");
            cfg.oracle.n = v.get<int>();
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace indemnity
