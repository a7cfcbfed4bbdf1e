#include "ovt/errors.hpp"
#include "ovt/experiment.hpp"
#include "ovt/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

// 0 ok, 1 usage, 2 bad data, 3 model hit its iteration limit
int exit_code_for(ovt::Errc code) {
    switch (code) {
    case ovt::Errc::invalid_config:
    case ovt::Errc::invalid_argument:
        return 1;
    default:
        return 2;
    }
}

ovt::ClassifierSelection parse_selection(const std::string& list) {
    ovt::ClassifierSelection sel{false, false, false, false, false};
    std::istringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "ann") sel.ann = true;
        else if (item == "rf") sel.rf = true;
        else if (item == "svml") sel.svm_linear = true;
        else if (item == "svmrbf") sel.svm_rbf = true;
        else if (item == "fusion") sel.fusion = true;
        else throw ovt::Error(ovt::Errc::invalid_config, "unknown classifier: " + item);
    }
    return sel;
}

std::vector<ovt::TruckSpec> parse_trucks(const std::string& list) {
    std::vector<ovt::TruckSpec> trucks;
    std::istringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        ovt::TruckSpec spec;
        const std::size_t a = item.find(':');
        const std::size_t b = a == std::string::npos ? a : item.find(':', a + 1);
        if (b == std::string::npos)
            throw ovt::Error(ovt::Errc::invalid_config, "expected id:n0:n1, got " + item);
        spec.truck_id = item.substr(0, a);
        try {
            spec.n_class0 = std::stoul(item.substr(a + 1, b - a - 1));
            spec.n_class1 = std::stoul(item.substr(b + 1));
        } catch (const std::exception&) {
            throw ovt::Error(ovt::Errc::invalid_config, "bad counts in " + item);
        }
        if (spec.truck_id.empty())
            throw ovt::Error(ovt::Errc::invalid_config, "empty truck id in " + item);
        trucks.push_back(std::move(spec));
    }
    if (trucks.empty()) throw ovt::Error(ovt::Errc::invalid_config, "no trucks given");
    return trucks;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ovt::Error(ovt::Errc::io_error, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// CLI11 only applies config files attached to the root app, so expand
// "--config FILE" before parsing: each key=value line becomes a --key=value
// token unless that key was already given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw ovt::Error(ovt::Errc::invalid_config, "--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;

    std::set<std::string> given;
    for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));

    const auto trim = [](const std::string& s) {
        const std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };

    std::istringstream lines(slurp(path));
    std::string line;
    while (std::getline(lines, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ovt::Error(ovt::Errc::bad_format,
                             "expected key=value in " + path + ", got: " + line);
        const std::string key = trim(line.substr(0, eq));
        if (!given.count(key)) args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"overtake detection from CAN traces"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labelled synthetic fleet");
    std::string synth_out, preset, trucks_arg, config_file;
    std::uint64_t synth_seed = 0;
    double drift = 1.0, noise = 1.0, trace_len = 65.0;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "fleet seed");
    synth->add_option("--preset", preset, "named inventory (reference)");
    synth->add_option("--trucks", trucks_arg, "inventory as id:n0:n1[,id:n0:n1...]");
    synth->add_option("--drift", drift, "overtake build-up strength");
    synth->add_option("--noise", noise, "noise scale");
    synth->add_option("--trace-len", trace_len, "trace length in seconds");
    synth->add_option("--config", config_file, "options file with key=value lines");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "crop, window and export features");
    std::string ingest_dir, ingest_out;
    ovt::TriggerRule ingest_rule;
    ovt::WindowingConfig ingest_win;
    ingest->add_option("--data-dir", ingest_dir, "directory with manifest.json")->required();
    ingest->add_option("--out", ingest_out, "feature CSV path")->required();
    ingest->add_option("--trigger-min-speed", ingest_rule.min_speed, "km/h, strict");
    ingest->add_option("--trigger-max-dist", ingest_rule.max_dist_ahead, "m, strict");
    ingest->add_option("--trigger-min-relspeed", ingest_rule.min_rel_speed, "km/h, strict");
    ingest->add_flag("--trigger-any-lane{false}", ingest_rule.lane_change_required,
                     "fire without the lane change flag");
    ingest->add_option("--window-len", ingest_win.window_len_frames, "frames per window");
    ingest->add_option("--hop", ingest_win.hop_frames, "frames between window starts");

    // run
    auto* run = app.add_subcommand("run", "train, score and report");
    std::string run_dir, run_out, classifiers = "ann,rf,svml,svmrbf,fusion";
    ovt::ExperimentConfig cfg;
    bool reuse_models = false;
    run->add_option("--data-dir", run_dir, "directory with manifest.json")->required();
    run->add_option("--out", run_out, "artifact directory")->required();
    run->add_option("--seed", cfg.seed, "experiment seed");
    run->add_option("--split-fraction", cfg.split_fraction, "train share of the smaller class");
    run->add_option("--classifiers", classifiers, "comma list: ann,rf,svml,svmrbf,fusion");
    run->add_option("--trigger-min-speed", cfg.trigger.min_speed, "km/h, strict");
    run->add_option("--trigger-max-dist", cfg.trigger.max_dist_ahead, "m, strict");
    run->add_option("--trigger-min-relspeed", cfg.trigger.min_rel_speed, "km/h, strict");
    run->add_flag("--trigger-any-lane{false}", cfg.trigger.lane_change_required,
                  "fire without the lane change flag");
    run->add_option("--window-len", cfg.windowing.window_len_frames, "frames per window");
    run->add_option("--hop", cfg.windowing.hop_frames, "frames between window starts");
    run->add_flag("--reuse-models", reuse_models, "score with models from a previous run");
    run->add_option("--config", config_file, "options file with key=value lines");

    // report
    auto* report = app.add_subcommand("report", "print the moment table of a finished run");
    std::string report_path;
    report->add_option("path", report_path, "artifact directory or moment_report.json")
        ->required();

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const ovt::Error& e) {
        std::cerr << "error: " << e.what() << " [" << ovt::to_string(e.code()) << "]\n";
        return exit_code_for(e.code());
    }
    std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            ovt::FleetConfig fleet_cfg;
            if (!preset.empty() && !trucks_arg.empty())
                throw ovt::Error(ovt::Errc::invalid_config, "--preset and --trucks clash");
            if (preset == "reference") {
                fleet_cfg = ovt::reference_inventory(synth_seed);
            } else if (preset.empty() && !trucks_arg.empty()) {
                fleet_cfg.trucks = parse_trucks(trucks_arg);
                fleet_cfg.seed = synth_seed;
            } else {
                throw ovt::Error(ovt::Errc::invalid_config,
                                 "need --preset reference or --trucks");
            }
            fleet_cfg.drift_strength = drift;
            fleet_cfg.noise_scale = noise;
            fleet_cfg.trace_len_s = trace_len;
            const ovt::Fleet fleet = ovt::generate_fleet(fleet_cfg);
            ovt::write_fleet(fleet, synth_out);
            std::printf("wrote %zu files to %s\n", fleet.recordings.size(), synth_out.c_str());
        } else if (*ingest) {
            const std::vector<ovt::Recording> recs = ovt::load_recordings(ingest_dir);
            std::vector<ovt::WindowSample> windows;
            for (const ovt::Recording& rec : recs) {
                const ovt::Recording annotated =
                    rec.trigger_index ? rec : ovt::annotate_trigger(rec, ingest_rule);
                const std::vector<ovt::WindowSample> w =
                    ovt::extract_windows(ovt::crop_around_trigger(annotated), ingest_win);
                windows.insert(windows.end(), w.begin(), w.end());
            }
            std::ofstream out(ingest_out, std::ios::binary);
            if (!out) throw ovt::Error(ovt::Errc::io_error, "cannot write " + ingest_out);
            out << ovt::feature_matrix_csv(windows);
            std::printf("ingested %zu files, %zu windows\n", recs.size(), windows.size());
        } else if (*run) {
            cfg.selection = parse_selection(classifiers);
            const std::vector<ovt::Recording> recs = ovt::load_recordings(run_dir);
            const ovt::ExperimentResult result =
                reuse_models
                    ? ovt::evaluate_models(recs, cfg, ovt::load_models(run_out, cfg.selection))
                    : ovt::run_experiment(recs, cfg);
            ovt::write_artifacts(result, run_out);
            std::cout << ovt::render_report(ovt::serialize_report(result));
            if (!result.all_converged) {
                std::cerr << "warning: a model hit its iteration limit\n";
                return 3;
            }
        } else if (*report) {
            namespace fs = std::filesystem;
            fs::path p(report_path);
            if (fs::is_directory(p)) p /= "moment_report.json";
            std::cout << ovt::render_report(slurp(p.string()));
        }
    } catch (const ovt::Error& e) {
        std::cerr << "error: " << e.what() << " [" << ovt::to_string(e.code()) << "]\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
