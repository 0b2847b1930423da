// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

// adsim: run, validate, sweep and plot ADS scenarios.

#include "ads/audit.hpp"
#include "ads/metrics.hpp"
#include "ads/scenario.hpp"
#include "ads/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kScenarioError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ads::Scenario load(const std::string& path)
{
    ads::Scenario sc = ads::load_scenario(path);
    ads::validate_scenario(sc);
    return sc;
}

ads::Metrics simulate(const ads::Scenario& sc, ads::Trace* keep = nullptr)
{
    ads::Simulation sim(sc);
    sim.run();
    if (keep) {
        *keep = sim.trace();
    }
    return ads::compute_metrics(sim.trace().records());
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) {
        throw UsageError("cannot write '" + path + "'");
    }
    out << text;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& trace_path,
            const std::string& metrics_path, bool audit)
{
    ads::Scenario sc = load(path);
    if (seed) {
        sc.seed = *seed;
    }
    ads::Trace trace;
    ads::Metrics m = simulate(sc, &trace);
    if (!trace_path.empty()) {
        write_file(trace_path, trace.to_text());
    }
    if (!metrics_path.empty()) {
        write_file(metrics_path, ads::metrics_to_json(m) + "\n");
    }
    for (const auto& [name, value] : ads::metrics_scalars(m)) {
        std::cout << std::left << std::setw(22) << name << value << "\n";
    }
    std::cout << std::left << std::setw(22) << "trace_digest" << std::hex << trace.digest() << std::dec << "\n";
    if (audit) {
        auto violations = ads::audit::all(trace.records());
        for (const auto& v : violations) {
            std::cout << "violation " << ads::to_string(v) << "\n";
        }
        std::cout << std::left << std::setw(22) << "violations" << violations.size() << "\n";
    }
    return kOk;
}

int cmd_validate(const std::string& path)
{
    ads::Scenario sc = load(path);
    std::cout << "ok: " << sc.devices.size() << " devices, " << sc.markets.size() << " markets, "
              << sc.workload.size() << " workload events, horizon " << sc.horizon << "\n";
    return kOk;
}

struct SweepParam {
    std::string key;
    std::vector<std::string> values;
};

SweepParam parse_param(const std::string& text)
{
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw UsageError("--param expects KEY=v1,v2,... but got '" + text + "'");
    }
    SweepParam p{text.substr(0, eq), {}};
    std::stringstream ss(text.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ',')) {
        if (!v.empty()) {
            p.values.push_back(v);
        }
    }
    if (p.values.empty()) {
        throw UsageError("--param '" + p.key + "' has no values");
    }
    return p;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& param_texts, unsigned seeds, unsigned jobs,
              const std::string& out_path)
{
    ads::Scenario base = load(path);
    std::vector<SweepParam> params;
    for (const auto& t : param_texts) {
        params.push_back(parse_param(t));
    }
    // Cartesian product of parameter values, then seeds.
    std::vector<std::vector<std::string>> combos{{}};
    for (const auto& p : params) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos) {
            for (const auto& v : p.values) {
                auto e = c;
                e.push_back(v);
                next.push_back(std::move(e));
            }
        }
        combos = std::move(next);
    }
    struct Job {
        std::vector<std::string> values;
        std::uint64_t seed;
        ads::Scenario scenario;
    };
    std::vector<Job> work;
    for (const auto& c : combos) {
        for (unsigned s = 0; s < seeds; ++s) {
            ads::Scenario sc = base;
            for (std::size_t i = 0; i < params.size(); ++i) {
                ads::apply_override(sc, params[i].key, c[i]);
            }
            sc.seed = base.seed + s;
            ads::validate_scenario(sc);
            work.push_back(Job{c, sc.seed, std::move(sc)});
        }
    }

    std::vector<ads::Metrics> results(work.size());
    jobs = std::max(1u, jobs);
    for (std::size_t start = 0; start < work.size(); start += jobs) {
        std::vector<std::future<ads::Metrics>> batch;
        for (std::size_t i = start; i < std::min(work.size(), start + jobs); ++i) {
            batch.push_back(std::async(std::launch::async, [&work, i] { return simulate(work[i].scenario); }));
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            results[start + i] = batch[i].get();
        }
    }

    std::ostringstream table;
    for (const auto& p : params) {
        table << p.key << "\t";
    }
    table << "seed";
    for (const auto& [name, value] : ads::metrics_scalars(ads::Metrics{})) {
        table << "\t" << name;
    }
    table << "\n";
    for (std::size_t i = 0; i < work.size(); ++i) {
        for (const auto& v : work[i].values) {
            table << v << "\t";
        }
        table << work[i].seed;
        for (const auto& [name, value] : ads::metrics_scalars(results[i])) {
            table << "\t" << value;
        }
        table << "\n";
    }
    if (out_path.empty()) {
        std::cout << table.str();
    } else {
        write_file(out_path, table.str());
    }
    return kOk;
}

struct Series {
    std::vector<std::pair<double, double>> points;
    double end = 0.0;
};

std::string svg_chart(const std::string& title, const std::string& label, const Series& s)
{
    const double w = 640;
    const double h = 360;
    const double left = 60;
    const double right = 20;
    const double top = 40;
    const double bottom = 50;
    double tmax = std::max(1.0, s.end);
    auto x = [&](double t) { return left + (w - left - right) * t / tmax; };
    auto y = [&](double v) { return top + (h - top - bottom) * (1.0 - std::clamp(v, 0.0, 1.0)); };

    std::ostringstream o;
    o << std::fixed << std::setprecision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << " " << h << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << w - right << "\" y2=\"" << y(0)
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left << "\" y2=\"" << y(1)
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double v = i / 4.0;
        o << "<text x=\"" << left - 8 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          << "font-size=\"11\">" << v << "</text>\n";
        double t = tmax * i / 4.0;
        o << "<text x=\"" << x(t) << "\" y=\"" << h - bottom + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << static_cast<long long>(t)
          << "</text>\n";
    }
    o << "<text x=\"" << w / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">time (ticks)</text>\n";
    o << "<text x=\"16\" y=\"" << h / 2 << "\" transform=\"rotate(-90 16 " << h / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
    // Step plot: each value holds until the next sample.
    o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    double last = 1.0;
    o << x(0) << "," << y(last);
    for (const auto& [t, v] : s.points) {
        o << " " << x(t) << "," << y(last) << " " << x(t) << "," << y(v);
        last = v;
    }
    o << " " << x(tmax) << "," << y(last) << "\"/>\n";
    o << "</svg>\n";
    return o.str();
}

int cmd_plot(const std::string& metrics_path, const std::string& out_dir)
{
    std::ifstream in(metrics_path);
    if (!in) {
        throw UsageError("cannot open metrics file '" + metrics_path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("bad metrics file '" + metrics_path + "': " + e.what());
    }
    Series survival;
    Series recall;
    survival.end = recall.end = j.value("end", 0.0);
    for (const auto& p : j.value("series", nlohmann::json::array())) {
        double t = p.at("t").get<double>();
        survival.points.emplace_back(t, p.at("survival").get<double>());
        recall.points.emplace_back(t, p.at("recall").get<double>());
    }
    std::filesystem::create_directories(out_dir);
    std::string s_path = (std::filesystem::path(out_dir) / "survival.svg").string();
    std::string r_path = (std::filesystem::path(out_dir) / "recall.svg").string();
    write_file(s_path, svg_chart("Item survival", "surviving fraction", survival));
    write_file(r_path, svg_chart("Chunk item recall", "delivered fraction", recall));
    std::cout << s_path << "\n" << r_path << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator for the ADS ad-hoc directory service"};
    app.require_subcommand(1);

    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string trace_path;
    std::string metrics_path;
    bool audit = false;
    auto* run = app.add_subcommand("run", "Run a scenario to its horizon");
    run->add_option("scenario", scenario, "Scenario file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--trace", trace_path, "Write the trace to this file");
    run->add_option("--metrics", metrics_path, "Write metrics JSON to this file");
    run->add_flag("--audit", audit, "Check trace invariants and list violations");

    auto* validate = app.add_subcommand("validate", "Load and check a scenario file");
    validate->add_option("scenario", scenario, "Scenario file")->required();

    std::vector<std::string> params;
    unsigned seeds = 1;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string table_path;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid and print a metrics table");
    sweep->add_option("scenario", scenario, "Scenario file")->required();
    sweep->add_option("--param", params, "KEY=v1,v2,... (repeatable)")->required();
    sweep->add_option("--seeds", seeds, "Seeds per grid point, counting up from the scenario seed")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
    sweep->add_option("--out", table_path, "Write the table here instead of stdout");

    std::string plot_in;
    std::string plot_dir = ".";
    auto* plot = app.add_subcommand("plot", "Write survival and recall charts from a metrics file");
    plot->add_option("metrics", plot_in, "Metrics JSON from run --metrics")->required();
    plot->add_option("--out", plot_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            return cmd_run(scenario, seed, trace_path, metrics_path, audit);
        }
        if (*validate) {
            return cmd_validate(scenario);
        }
        if (*sweep) {
            return cmd_sweep(scenario, params, seeds, jobs, table_path);
        }
        return cmd_plot(plot_in, plot_dir);
    } catch (const ads::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kScenarioError;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
