#include "lsmc/cli.hpp"

#include "lsmc/basis.hpp"
#include "lsmc/config.hpp"
#include "lsmc/errors.hpp"
#include "lsmc/harness.hpp"
#include "lsmc/model.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace lsmc {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string rational_text(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double rational_value(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

nlohmann::json load_with_overrides(const std::string& path, const std::vector<std::string>& overrides,
                                   const std::optional<std::uint64_t>& seed,
                                   const std::optional<unsigned>& threads) {
    nlohmann::json doc = read_config_json(path);
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (threads) doc["threads"] = *threads;
    return doc;
}

fs::path default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "lsmc-output";
}

// ---- verbs -----------------------------------------------------------------

int cmd_run(const std::string& config_path, const std::string& output_dir,
            const std::vector<std::string>& overrides, const std::optional<std::uint64_t>& seed,
            const std::optional<unsigned>& threads, std::ostream& out) {
    const ExperimentConfig cfg = parse_config(load_with_overrides(config_path, overrides, seed, threads));
    const ConvergenceReport report = run_experiment(cfg);
    const fs::path dir = output_dir.empty() ? default_output_dir() : fs::path(output_dir);
    fs::create_directories(dir);
    write_file_atomic(dir / "report.csv", rows_to_csv(report.rows));
    if (cfg.estimator == EstimatorKind::compare) {
        write_file_atomic(dir / "report_now.csv", rows_to_csv(report.now_rows));
    }
    write_file_atomic(dir / "report.json", report_to_json(report).dump(2) + "\n");

    out << rows_to_csv(report.rows);
    if (report.slope) {
        out << "slope vs " << report.slope_axis << ": " << shortest(report.slope->slope) << " [" << shortest(report.slope->ci_low)
            << ", " << shortest(report.slope->ci_high) << "]\n";
    }
    if (report.plateau) out << "plateau: " << shortest(*report.plateau) << "\n";
    if (cfg.estimator == EstimatorKind::compare) {
        out << "regress-now rows:\n" << rows_to_csv(report.now_rows);
        if (report.now_slope) out << "regress-now slope vs N: " << shortest(report.now_slope->slope) << "\n";
        out << "later steeper in " << shortest(100.0 * report.later_steeper_fraction) << "% of batches\n";
        out << "jensen violations: " << report.jensen_violations << " of " << report.jensen_checks << "\n";
    }
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    out << "wrote " << (dir / "report.csv").string() << "\n";
    return kExitOk;
}

int cmd_basis_dump(const std::string& config_path, const std::vector<std::size_t>& K_override,
                   const std::string& output, std::ostream& out) {
    const ExperimentConfig cfg = parse_config(read_config_json(config_path));
    FeatureSpec feat{FeatureKind::terminal, cfg.feature.eval_time, 0.0};
    const auto law = gaussian_feature_law(cfg.process, feat);
    if (!law) throw ConfigError("process.kind: no Gaussian feature law");
    const Domain dom = central_domain(cfg.process, feat, cfg.domain_epsilon);
    const DistSpec dist = DistSpec::truncated_normal(law->first, law->second, dom.a1, dom.a2);
    const auto g = payoff_function(cfg.payoff);
    nlohmann::json doc;
    doc["law"] = dist.describe();
    doc["bases"] = nlohmann::json::array();
    for (std::size_t K : K_override.empty() ? cfg.K_list : K_override) {
        if (K < 1) throw ConfigError("--K: must be >= 1");
        const SieveBasis basis = build_basis(dist, K);
        nlohmann::json b = basis_to_json(basis);
        const ApproxErrorMoments m = approx_error_moments(g, basis, dist);
        b["approx_l2"] = m.l2;
        b["approx_fourth_moment_root"] = m.fourth_root;
        b["moment_ratio_max"] = moment_ratio_max(basis, dist);
        doc["bases"].push_back(std::move(b));
    }
    const std::string text = doc.dump(2) + "\n";
    if (output.empty()) out << text;
    else write_file_atomic(output, text);
    return kExitOk;
}

int cmd_basket_check(std::ostream& out) {
    const auto nodes = basket_tree_expectations();
    const auto enumerated = basket_tree_expectations_by_enumeration();
    out << "time-1 node (Z1, Z2) -> E[(Z1(2) + Z2(2) - " << kBasketStrike << ")^+ | node]\n";
    bool consistent = nodes.size() == enumerated.size();
    Rational tower(0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const BasketNode& n = nodes[i];
        out << "(" << n.z1 << "," << n.z2 << ") -> " << shortest(rational_value(n.expectation)) << "  ["
            << rational_text(n.expectation) << ", probability " << rational_text(n.probability) << "]\n";
        tower += n.probability * n.expectation;
        if (i < enumerated.size()) {
            const BasketNode& e = enumerated[i];
            consistent = consistent && e.z1 == n.z1 && e.z2 == n.z2 && e.expectation == n.expectation &&
                         e.probability == n.probability;
        }
    }
    const Rational leaves = basket_tree_expected_payoff();
    out << "E[X] by leaf enumeration: " << rational_text(leaves) << " = " << shortest(rational_value(leaves)) << "\n";
    out << "probability-weighted node sum: " << rational_text(tower) << "\n";

    auto value_at = [&](int z1, int z2) -> std::optional<Rational> {
        for (const auto& n : nodes) {
            if (n.z1 == z1 && n.z2 == z2) return n.expectation;
        }
        return std::nullopt;
    };
    const bool matches = value_at(12, 6) == Rational(25, 4) && value_at(6, 12) == Rational(7);
    const bool ok = matches && consistent && tower == leaves;
    out << (ok ? "basket check: ok" : "basket check: MISMATCH") << "\n";
    return ok ? kExitOk : kExitBasketMismatch;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& output, std::ostream& out) {
    if (inputs.empty()) throw ConfigError("plot needs at least one report CSV");
    std::vector<PlotSeries> series;
    std::string axis;
    for (const auto& path : inputs) {
        std::string this_axis;
        series.push_back(read_report_csv(path, this_axis));
        if (axis.empty()) axis = this_axis;
        else if (axis != this_axis) throw ConfigError("plot: reports sweep different axes (K and N)");
    }
    const fs::path target = output.empty() ? fs::path(inputs.front()).replace_extension(".svg") : fs::path(output);
    write_file_atomic(target, render_svg(series, axis));
    out << "wrote " << target.string() << "\n";
    return kExitOk;
}

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    for (const auto& path : paths) {
        try {
            parse_config(read_config_json(path));
            out << path << ": ok\n";
        } catch (const ConfigError& e) {
            err << path << ": " << e.what() << "\n";
            code = kExitConfig;
        }
    }
    return code;
}

} // namespace

// ---- files -----------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f << contents;
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw std::runtime_error("failed writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

PlotSeries read_report_csv(const fs::path& path, std::string& axis) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read report '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ConfigError("report '" + path.string() + "' lacks the header " + std::string(kCsvHeader));
    }
    std::vector<double> K;
    std::vector<double> N;
    std::vector<double> mse;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) {
            throw ConfigError("report '" + path.string() + "' row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " columns, expected 7");
        }
        try {
            K.push_back(std::stod(cells[0]));
            N.push_back(std::stod(cells[1]));
            mse.push_back(cells[3] == "nan" ? std::nan("") : std::stod(cells[3]));
        } catch (const std::exception&) {
            throw ConfigError("report '" + path.string() + "' row " + std::to_string(row) + " is not numeric");
        }
    }
    if (mse.size() < 2) throw ConfigError("report '" + path.string() + "' needs at least two rows to plot");
    const bool K_varies = std::adjacent_find(K.begin(), K.end(), std::not_equal_to<>()) != K.end();
    axis = K_varies ? "K" : "N";
    return {path.stem().string(), K_varies ? K : N, mse};
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& axis) {
    constexpr double width = 640.0;
    constexpr double height = 480.0;
    constexpr double left = 70.0;
    constexpr double right = 150.0;
    constexpr double top = 30.0;
    constexpr double bottom = 60.0;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.y[i] > 0.0) || !(s.x[i] > 0.0)) continue;
            xmin = std::min(xmin, std::log10(s.x[i]));
            xmax = std::max(xmax, std::log10(s.x[i]));
            ymin = std::min(ymin, std::log10(s.y[i]));
            ymax = std::max(ymax, std::log10(s.y[i]));
        }
    }
    if (!(xmax > xmin)) throw ConfigError("plot needs at least two distinct positive x values");
    if (!(ymax > ymin)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;
    auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * (width - left - right); };
    auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * (height - top - bottom); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
        << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
        svg << "<text x=\"" << px(d) << "\" y=\"" << height - bottom + 18 << "\" font-size=\"11\" text-anchor=\"middle\">1e"
            << d << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e" << d
            << "</text>\n";
    }
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
        << "\" font-size=\"13\" text-anchor=\"middle\">" << xml_escape(axis) << " (log scale)</text>\n"
        << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (top + height - bottom) / 2 << ")\">MSE (log scale)</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % std::size(colors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!(series[s].y[i] > 0.0)) continue;
            svg << (first ? "" : " ") << px(std::log10(series[s].x[i])) << "," << py(std::log10(series[s].y[i]));
            first = false;
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 + 18.0 * static_cast<double>(s)
            << "\" font-size=\"12\" fill=\"" << color << "\">" << xml_escape(series[s].label) << "</text>\n";
    }

    // Slope -4 guide through the first positive point of the first series.
    const auto& s0 = series.front();
    for (std::size_t i = 0; i < s0.x.size(); ++i) {
        if (!(s0.y[i] > 0.0)) continue;
        const double x0 = std::log10(s0.x[i]);
        const double y0 = std::log10(s0.y[i]);
        const double y1 = y0 - 4.0 * (xmax - x0);
        svg << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(y1)
            << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n"
            << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 + 18.0 * static_cast<double>(series.size())
            << "\" font-size=\"12\" fill=\"gray\">guide slope -4</text>\n"
            << "<text class=\"guide-slope\" x=\"" << px(0.5 * (x0 + xmax)) << "\" y=\"" << py(0.5 * (y0 + y1)) - 6
            << "\" font-size=\"12\" fill=\"gray\">-4</text>\n";
        break;
    }
    svg << "</svg>\n";
    return svg.str();
}

// ---- dispatch --------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regress-Later / Regress-Now least-squares Monte Carlo experiments", "lsmc"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    auto* run = app.add_subcommand("run", "Run an experiment config and write report.csv / report.json");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("-o,--output-dir", output_dir,
                    std::string("Output directory (default: $") + kOutputDirEnv + " or ./lsmc-output)");
    run->add_option("--set", overrides, "Override a config field, e.g. --set repetitions=10");
    run->add_option("--seed", seed, "Override the root seed");
    run->add_option("--threads", threads, "Worker threads (0 = hardware)");

    std::string dump_config;
    std::vector<std::size_t> dump_K;
    std::string dump_output;
    auto* dump = app.add_subcommand("basis-dump", "Print the sieve basis of a config's regressor law as JSON");
    dump->add_option("config", dump_config, "Experiment config (JSON)")->required();
    dump->add_option("--K", dump_K, "Bin counts (default: the config's K list)");
    dump->add_option("-o,--output", dump_output, "Write to a file instead of standard output");

    auto* basket = app.add_subcommand("basket-check", "Exact conditional expectations of the two-asset tree");

    std::vector<std::string> plot_inputs;
    std::string plot_output;
    auto* plot = app.add_subcommand("plot", "Log-log SVG convergence plot of one or more report CSVs");
    plot->add_option("reports", plot_inputs, "Report CSV files, one series each")->required();
    plot->add_option("-o,--output", plot_output, "SVG path (default: first report with .svg)");

    std::vector<std::string> validate_paths;
    auto* validate = app.add_subcommand("validate-config", "Check configs against the schema");
    validate->add_option("configs", validate_paths, "Config files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, output_dir, overrides, seed, threads, out);
        if (*dump) return cmd_basis_dump(dump_config, dump_K, dump_output, out);
        if (*basket) return cmd_basket_check(out);
        if (*plot) return cmd_plot(plot_inputs, plot_output, out);
        if (*validate) return cmd_validate(validate_paths, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}

} // namespace lsmc
