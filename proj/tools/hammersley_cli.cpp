// hammersley <experiment> [options]: runs one experiment and reports a verdict.
// Exit status: 0 pass, 1 verdict fail, 2 usage or parameter error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hammersley/experiments.hpp"

namespace ex = hammersley::experiments;
using ex::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string flag_name(const std::string& key) {
    std::string s = key;
    for (auto& c : s)
        if (c == '_') c = '-';
    return "--" + s;
}

// Text from the command line in the JSON shape of the default.
json parse_value(const json& def, const std::string& key, const std::vector<std::string>& raw) {
    auto number = [&](const std::string& s) -> json {
        std::size_t used = 0;
        try {
            if (def.is_array() ? (!def.empty() && def.front().is_number_integer()) : def.is_number_integer()) {
                const long long v = std::stoll(s, &used);
                if (used == s.size()) return v;
            }
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw UsageError("bad number '" + s + "' for " + flag_name(key));
    };
    if (def.is_array()) {
        json a = json::array();
        for (const auto& item : raw) {
            std::stringstream ss(item);
            std::string part;
            while (std::getline(ss, part, ','))
                if (!part.empty()) a.push_back(number(part));
        }
        return a;
    }
    if (raw.size() != 1) throw UsageError(flag_name(key) + " takes one value");
    if (def.is_string()) return raw.front();
    return number(raw.front());
}

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw UsageError("config must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

void print_summary(const ex::Report& r, std::ostream& os) {
    os << r.doc["experiment"].get<std::string>() << " (" << r.doc["version"].get<std::string>() << ")\n";
    for (auto it = r.doc["verdict"]["checks"].begin(); it != r.doc["verdict"]["checks"].end(); ++it)
        os << "  " << (it.value().get<bool>() ? "PASS " : "FAIL ") << it.key() << '\n';
    os << (r.pass ? "PASS" : "FAIL") << '\n';
}

struct Common {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out, config;
    bool json_out = false, csv = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hammersley process experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ex::version());

    Common common;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> raw;
    std::map<std::string, CLI::App*> subs;
    CLI::App* list = app.add_subcommand("list", "list experiments and their defaults");

    for (const auto& e : ex::registry()) {
        CLI::App* sub = app.add_subcommand(e.name, e.summary);
        subs[e.name] = sub;
        sub->add_option("--seed", common.seed, "master seed");
        sub->add_option("--threads", common.threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", common.out, "directory for the JSON report and CSV files");
        sub->add_option("--config", common.config, "JSON file with parameters; flags override it");
        sub->add_flag("--json", common.json_out, "print the canonical JSON report");
        sub->add_flag("--csv", common.csv, "write CSV tables next to the report");
        for (auto it = e.defaults.begin(); it != e.defaults.end(); ++it) {
            auto* opt = sub->add_option(flag_name(it.key()), raw[e.name][it.key()], "default " + it.value().dump());
            if (it.value().is_array())
                opt->expected(0, CLI::detail::expected_max_vector_size);
            else
                opt->expected(1);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& e : ex::registry()) std::cout << e.name << "  " << e.defaults.dump() << '\n';
        return 0;
    }

    try {
        const ex::Experiment* e = nullptr;
        for (const auto& x : ex::registry())
            if (subs[x.name]->parsed()) e = &x;
        if (!e) throw UsageError("no experiment selected");

        json overrides = common.config.empty() ? json::object() : read_config(common.config);
        CLI::App* sub = subs[e->name];
        if (overrides.contains("seed") && sub->get_option("--seed")->count() == 0)
            common.seed = overrides["seed"].get<std::uint64_t>();
        if (overrides.contains("threads") && sub->get_option("--threads")->count() == 0)
            common.threads = overrides["threads"].get<unsigned>();
        overrides.erase("seed");
        overrides.erase("threads");
        for (const auto& [key, values] : raw[e->name])
            if (sub->get_option(flag_name(key))->count() > 0) overrides[key] = parse_value(e->defaults[key], key, values);

        ex::Report r;
        try {
            r = ex::run(e->name, overrides, common.seed, common.threads);
        } catch (const std::invalid_argument& err) {
            throw UsageError(err.what());
        } catch (const std::domain_error& err) {
            throw UsageError(err.what());
        }

        const std::string text = ex::canonical(r.doc);
        if (!common.out.empty() || common.csv) {
            const std::filesystem::path dir = common.out.empty() ? "." : common.out;
            std::filesystem::create_directories(dir);
            if (!common.out.empty()) write_file(dir / (e->name + ".json"), text);
            if (common.csv)
                for (const auto& [file, content] : r.csv) write_file(dir / file, content);
        }
        if (common.json_out)
            std::cout << text;
        else
            print_summary(r, std::cout);
        return r.pass ? 0 : 1;
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const json::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    }
}
