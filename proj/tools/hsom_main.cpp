// Command-line front end: train, predict, and bench subcommands wiring the
// loaders, trainers, and metrics into one experiment pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsom/csv.hpp"
#include "hsom/dataset.hpp"
#include "hsom/errors.hpp"
#include "hsom/eval.hpp"
#include "hsom/model_io.hpp"
#include "hsom/parallel.hpp"
#include "hsom/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kWorkersEnvVar = "HSOM_WORKERS";

struct Options {
    std::optional<std::string> dataset;
    std::optional<std::string> synthetic;
    std::optional<std::string> label_column;
    std::vector<std::string> zero_labels;
    std::vector<std::string> one_labels;
    char delimiter = ',';

    std::vector<hsom::GridDim> grids = {{3, 3}};
    std::string mode = "sequential";
    std::optional<std::size_t> workers;  // unresolved: flag/env/config/default
    std::uint64_t seed = 42;
    std::size_t reps = 1;
    double tau = 1.0;
    std::size_t max_depth = 8;
    double split = 0.8;
    hsom::TrainSchedule sched;  // delta0/iterations 0 = auto

    std::string out;
    std::string format = "json";
    std::string model_path;  // predict only
};

hsom::GridDim parse_grid(const std::string& text) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == text.size())
        throw hsom::InvalidInput("bad grid '" + text + "', expected WxH like 3x3");
    try {
        const std::size_t w = std::stoul(text.substr(0, x));
        const std::size_t h = std::stoul(text.substr(x + 1));
        if (w < 1 || h < 1) throw std::out_of_range("zero");
        return {w, h};
    } catch (const std::exception&) {
        throw hsom::InvalidInput("bad grid '" + text + "', expected WxH like 3x3");
    }
}

std::vector<hsom::GridDim> parse_grid_list(const std::string& text) {
    std::vector<hsom::GridDim> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(',', start);
        const std::string item =
            pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
        if (!item.empty()) out.push_back(parse_grid(item));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (out.empty()) throw hsom::InvalidInput("empty grid list");
    return out;
}

/// Synthetic specs look like "blobs4" or "blobs2:n=20000,dim=8,sigma=1,sep=10".
struct SyntheticSpec {
    std::size_t blobs = 2;
    std::size_t n = 10000;
    std::size_t dim = 8;
    double sigma = 1.0;
    double separation = 10.0;
};

SyntheticSpec parse_synthetic(const std::string& text) {
    SyntheticSpec spec;
    std::string head = text;
    std::string params;
    if (const std::size_t colon = text.find(':'); colon != std::string::npos) {
        head = text.substr(0, colon);
        params = text.substr(colon + 1);
    }
    if (head.rfind("blobs", 0) != 0)
        throw hsom::InvalidInput("unknown synthetic spec '" + text + "' (expected blobs<K>[:k=v,...])");
    try {
        spec.blobs = std::stoul(head.substr(5));
    } catch (const std::exception&) {
        throw hsom::InvalidInput("bad blob count in synthetic spec '" + text + "'");
    }
    std::size_t start = 0;
    while (start < params.size()) {
        const std::size_t pos = params.find(',', start);
        const std::string item =
            pos == std::string::npos ? params.substr(start) : params.substr(start, pos - start);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw hsom::InvalidInput("bad synthetic parameter '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "n") spec.n = std::stoul(value);
            else if (key == "dim") spec.dim = std::stoul(value);
            else if (key == "sigma") spec.sigma = std::stod(value);
            else if (key == "sep") spec.separation = std::stod(value);
            else throw hsom::InvalidInput("unknown synthetic parameter '" + key + "'");
        } catch (const hsom::InvalidInput&) {
            throw;
        } catch (const std::exception&) {
            throw hsom::InvalidInput("bad value for synthetic parameter '" + key + "'");
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return spec;
}

void apply_config_file(Options& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hsom::IoError("cannot open config " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw hsom::InvalidInput(path + ": " + e.what());
    }
    try {
        if (cfg.contains("dataset")) opt.dataset = cfg["dataset"].get<std::string>();
        if (cfg.contains("synthetic")) opt.synthetic = cfg["synthetic"].get<std::string>();
        if (cfg.contains("label_column")) opt.label_column = cfg["label_column"].get<std::string>();
        if (cfg.contains("zero_labels"))
            opt.zero_labels = cfg["zero_labels"].get<std::vector<std::string>>();
        if (cfg.contains("one_labels"))
            opt.one_labels = cfg["one_labels"].get<std::vector<std::string>>();
        if (cfg.contains("delimiter")) {
            const auto d = cfg["delimiter"].get<std::string>();
            if (d.size() != 1) throw hsom::InvalidInput(path + ": delimiter must be one character");
            opt.delimiter = d[0];
        }
        if (cfg.contains("grid")) opt.grids = parse_grid_list(cfg["grid"].get<std::string>());
        if (cfg.contains("grids")) {
            opt.grids.clear();
            for (const auto& g : cfg["grids"]) opt.grids.push_back(parse_grid(g.get<std::string>()));
        }
        if (cfg.contains("mode")) opt.mode = cfg["mode"].get<std::string>();
        if (cfg.contains("workers")) opt.workers = cfg["workers"].get<std::size_t>();
        if (cfg.contains("seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("reps")) opt.reps = cfg["reps"].get<std::size_t>();
        if (cfg.contains("tau")) opt.tau = cfg["tau"].get<double>();
        if (cfg.contains("max_depth")) opt.max_depth = cfg["max_depth"].get<std::size_t>();
        if (cfg.contains("split")) opt.split = cfg["split"].get<double>();
        if (cfg.contains("schedule")) {
            const auto& s = cfg["schedule"];
            if (s.contains("alpha0")) opt.sched.alpha0 = s["alpha0"].get<double>();
            if (s.contains("delta0")) opt.sched.delta0 = s["delta0"].get<double>();
            if (s.contains("delta_min")) opt.sched.delta_min = s["delta_min"].get<double>();
            if (s.contains("iterations")) opt.sched.iterations = s["iterations"].get<std::size_t>();
        }
        if (cfg.contains("out")) opt.out = cfg["out"].get<std::string>();
        if (cfg.contains("format")) opt.format = cfg["format"].get<std::string>();
    } catch (const json::exception& e) {
        throw hsom::InvalidInput(path + ": " + e.what());
    }
}

/// flag > environment > config > logical core count
std::size_t resolve_worker_count(const std::optional<std::size_t>& flag_value,
                                 const std::optional<std::size_t>& config_value) {
    if (flag_value) return *flag_value;
    if (const char* env = std::getenv(kWorkersEnvVar)) {
        try {
            const unsigned long parsed = std::stoul(env);
            if (parsed < 1) throw std::out_of_range("zero");
            return parsed;
        } catch (const std::exception&) {
            throw hsom::InvalidInput(std::string(kWorkersEnvVar) + "='" + env +
                                     "' is not a positive integer");
        }
    }
    if (config_value) return *config_value;
    return hsom::resolve_workers(0);
}

struct LoadedData {
    hsom::LabeledDataset data;
    std::size_t dropped = 0;
    std::string source;
};

LoadedData load_input(const Options& opt, bool allow_empty = false) {
    if (opt.dataset && opt.synthetic)
        throw hsom::InvalidInput("give either --dataset or --synthetic, not both");
    LoadedData loaded;
    if (opt.synthetic) {
        const SyntheticSpec spec = parse_synthetic(*opt.synthetic);
        const auto blobs =
            hsom::make_axis_blobs(spec.blobs, spec.dim, spec.sigma, spec.separation);
        loaded.data = hsom::synth_blobs(spec.n, blobs, hsom::mix64(opt.seed ^ 0x73796e7468ULL));
        loaded.source = *opt.synthetic;
        return loaded;
    }
    if (!opt.dataset) throw hsom::InvalidInput("no input: give --dataset <path> or --synthetic <spec>");
    hsom::CsvOptions csv;
    csv.label_column = opt.label_column;
    csv.delimiter = opt.delimiter;
    if (!opt.zero_labels.empty()) csv.zero_labels = opt.zero_labels;
    csv.one_labels = opt.one_labels;
    csv.allow_empty = allow_empty;
    auto result = hsom::load_csv(*opt.dataset, csv);
    loaded.data = std::move(result.data);
    loaded.dropped = result.dropped_rows;
    loaded.source = *opt.dataset;
    return loaded;
}

hsom::GrowthConfig make_growth_config(const Options& opt, hsom::GridDim grid, std::uint64_t seed) {
    hsom::GrowthConfig growth;
    growth.tau = opt.tau;
    growth.max_depth = opt.max_depth;
    growth.grid = grid;
    growth.sched = opt.sched;
    growth.seed = seed;
    return growth;
}

hsom::HsomModel run_training(const hsom::LabeledDataset& train, const Options& opt,
                             hsom::GridDim grid, std::uint64_t seed, std::size_t workers,
                             bool parallel) {
    const hsom::GrowthConfig growth = make_growth_config(opt, grid, seed);
    if (parallel) return hsom::train_parallel(train, {workers, growth});
    return hsom::train_sequential(train, growth);
}

fs::path sibling_path(const fs::path& base, const std::string& suffix) {
    fs::path out = base;
    out.replace_extension();
    out += suffix;
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw hsom::IoError("cannot write " + path.string());
    out << text;
    if (!out) throw hsom::IoError("failed while writing " + path.string());
}

int cmd_train(const Options& opt, std::size_t workers) {
    if (opt.grids.size() != 1)
        throw hsom::InvalidInput("train expects a single --grid value");
    if (opt.mode != "sequential" && opt.mode != "parallel")
        throw hsom::InvalidInput("--mode must be 'sequential' or 'parallel'");

    LoadedData loaded = load_input(opt);
    if (loaded.dropped > 0)
        std::cout << "dropped " << loaded.dropped << " rows with non-finite values\n";
    std::cout << "loaded " << loaded.source << ": N=" << loaded.data.size()
              << " P=" << loaded.data.feature_dim()
              << " contamination=" << loaded.data.contamination() << "\n";

    const hsom::LabeledDataset normalized = hsom::normalize_l2(std::move(loaded.data));
    const hsom::SplitPair split =
        hsom::split_train_test(normalized, opt.split, hsom::mix64(opt.seed ^ 0x73706c6974ULL));

    const bool parallel = opt.mode == "parallel";
    const hsom::HsomModel model =
        run_training(split.train, opt, opt.grids[0], opt.seed, workers, parallel);

    auto [predictions, pt_ms] = hsom::time_prediction(model, split.test);
    const hsom::EvalReport rep =
        hsom::report(hsom::confusion(predictions, split.test.labels), model.training_time_s, pt_ms);

    const fs::path model_path = opt.out.empty() ? fs::path("hsom_model.json") : fs::path(opt.out);
    hsom::save_model(model, model_path);

    fs::path report_path;
    if (opt.format == "csv") {
        report_path = sibling_path(model_path, ".report.csv");
        write_text(report_path, std::string(hsom::kReportCsvHeader) + "\n" +
                                    hsom::report_to_csv_row(rep) + "\n");
    } else if (opt.format == "json") {
        report_path = sibling_path(model_path, ".report.json");
        json doc = hsom::report_to_json(rep);
        doc["dataset"] = loaded.source;
        doc["mode"] = opt.mode;
        doc["grid"] = std::to_string(opt.grids[0].width) + "x" + std::to_string(opt.grids[0].height);
        doc["seed"] = opt.seed;
        doc["model"] = model_path.string();
        doc["depth"] = model.depth;
        doc["node_count"] = model.node_count;
        write_text(report_path, doc.dump(2) + "\n");
    } else {
        throw hsom::InvalidInput("--format must be 'json' or 'csv'");
    }

    std::cout << "model: " << model_path.string() << " (depth=" << model.depth
              << " nodes=" << model.node_count << ")\n";
    std::cout << "report: " << report_path.string() << " accuracy=" << rep.accuracy
              << " fpr=" << rep.fpr << " fnr=" << rep.fnr << " tt_s=" << rep.tt_s
              << " pt_ms=" << rep.pt_ms << "\n";
    return 0;
}

int cmd_predict(const Options& opt) {
    if (opt.model_path.empty()) throw hsom::InvalidInput("predict requires --model <path>");
    if (!opt.dataset) throw hsom::InvalidInput("predict requires --dataset <input csv>");
    const hsom::HsomModel model = hsom::load_model(opt.model_path);

    hsom::CsvOptions csv;
    csv.label_column = opt.label_column;
    csv.delimiter = opt.delimiter;
    if (!opt.zero_labels.empty()) csv.zero_labels = opt.zero_labels;
    csv.one_labels = opt.one_labels;
    csv.allow_empty = true;
    hsom::CsvLoadResult input = hsom::load_csv(*opt.dataset, csv);
    if (input.data.size() > 0 && input.data.feature_dim() != model.feature_dim) {
        // maybe the input carries no label column; retry with every column as a feature
        csv.no_label_column = true;
        hsom::CsvLoadResult retry = hsom::load_csv(*opt.dataset, csv);
        if (retry.data.size() > 0 && retry.data.feature_dim() == model.feature_dim) {
            input = std::move(retry);
        } else {
            throw hsom::InvalidInput("feature dimension mismatch: model expects P=" +
                                     std::to_string(model.feature_dim) + ", input has P=" +
                                     std::to_string(input.data.feature_dim()));
        }
    }

    const hsom::LabeledDataset normalized = hsom::normalize_l2(std::move(input.data));
    std::string out_text = "prediction\n";
    for (std::size_t i = 0; i < normalized.size(); ++i)
        out_text += hsom::predict(model, normalized.features.row(i)) ? "1\n" : "0\n";

    const fs::path out_path = opt.out.empty() ? fs::path("predictions.csv") : fs::path(opt.out);
    write_text(out_path, out_text);
    std::cout << "wrote " << normalized.size() << " predictions to " << out_path.string() << "\n";
    return 0;
}

int cmd_bench(const Options& opt, std::size_t workers) {
    LoadedData loaded = load_input(opt);
    if (loaded.dropped > 0)
        std::cout << "dropped " << loaded.dropped << " rows with non-finite values\n";
    const hsom::LabeledDataset normalized = hsom::normalize_l2(std::move(loaded.data));
    const hsom::SplitPair split =
        hsom::split_train_test(normalized, opt.split, hsom::mix64(opt.seed ^ 0x73706c6974ULL));
    std::cout << "bench on " << loaded.source << ": train N=" << split.train.size()
              << " test N=" << split.test.size() << " reps=" << opt.reps
              << " workers=" << workers << "\n";

    json grids_doc = json::array();
    std::string series_csv = "grid,speedup\n";
    for (const hsom::GridDim grid : opt.grids) {
        const std::string grid_name =
            std::to_string(grid.width) + "x" + std::to_string(grid.height);
        std::vector<hsom::EvalReport> seq_reports;
        std::vector<hsom::EvalReport> par_reports;
        for (std::size_t rep_i = 0; rep_i < opt.reps; ++rep_i) {
            const std::uint64_t seed = opt.seed + rep_i;
            for (const bool parallel : {false, true}) {
                const hsom::HsomModel model =
                    run_training(split.train, opt, grid, seed, workers, parallel);
                auto [predictions, pt_ms] = hsom::time_prediction(model, split.test);
                const hsom::EvalReport rep = hsom::report(
                    hsom::confusion(predictions, split.test.labels), model.training_time_s, pt_ms);
                (parallel ? par_reports : seq_reports).push_back(rep);
            }
        }
        const hsom::RunAggregate seq_agg = hsom::aggregate(seq_reports);
        const hsom::RunAggregate par_agg = hsom::aggregate(par_reports);
        const double sp = hsom::speedup(seq_agg.mean.tt_s, par_agg.mean.tt_s);
        std::cout << "  " << grid_name << ": sequential tt_s=" << seq_agg.mean.tt_s
                  << " parallel tt_s=" << par_agg.mean.tt_s << " speedup=" << sp << "\n";
        grids_doc.push_back({{"grid", grid_name},
                             {"sequential", hsom::aggregate_to_json(seq_agg)},
                             {"parallel", hsom::aggregate_to_json(par_agg)},
                             {"speedup", sp}});
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), sp);
        series_csv += grid_name + "," + std::string(buf, ptr) + "\n";
    }

    const fs::path out_path = opt.out.empty() ? fs::path("bench.json") : fs::path(opt.out);
    if (opt.format == "csv") {
        std::string flat = std::string("grid,mode,") + hsom::kReportCsvHeader + ",speedup\n";
        for (const auto& entry : grids_doc) {
            for (const char* mode : {"sequential", "parallel"}) {
                hsom::EvalReport mean;
                const auto& m = entry[mode]["mean"];
                mean.precision_0 = m["precision"]["0"].get<double>();
                mean.precision_1 = m["precision"]["1"].get<double>();
                mean.recall_0 = m["recall"]["0"].get<double>();
                mean.recall_1 = m["recall"]["1"].get<double>();
                mean.f1_0 = m["f1"]["0"].get<double>();
                mean.f1_1 = m["f1"]["1"].get<double>();
                mean.accuracy = m["accuracy"].get<double>();
                mean.fpr = m["fpr"].get<double>();
                mean.fnr = m["fnr"].get<double>();
                mean.tt_s = m["tt_s"].get<double>();
                mean.pt_ms = m["pt_ms"].get<double>();
                char buf[32];
                auto [ptr, ec] =
                    std::to_chars(buf, buf + sizeof(buf), entry["speedup"].get<double>());
                flat += entry["grid"].get<std::string>() + "," + mode + "," +
                        hsom::report_to_csv_row(mean) + "," + std::string(buf, ptr) + "\n";
            }
        }
        write_text(out_path, flat);
    } else if (opt.format == "json") {
        json doc = {{"dataset", loaded.source}, {"reps", opt.reps},     {"workers", workers},
                    {"split", opt.split},       {"seed", opt.seed},     {"grids", grids_doc}};
        write_text(out_path, doc.dump(2) + "\n");
    } else {
        throw hsom::InvalidInput("--format must be 'json' or 'csv'");
    }
    write_text(sibling_path(out_path, ".speedup.csv"), series_csv);
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

void add_common_flags(CLI::App* cmd, Options& opt, std::string& config_path, std::string& grid_text,
                      std::optional<std::size_t>& workers_flag) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its values");
    cmd->add_option("--dataset", opt.dataset, "CSV dataset path");
    cmd->add_option("--synthetic", opt.synthetic, "synthetic spec, e.g. blobs4:n=20000,dim=8");
    cmd->add_option("--label-column", opt.label_column, "label column name (default: last column)");
    cmd->add_option("--grid", grid_text, "grid size(s), WxH or comma list");
    cmd->add_option("--mode", opt.mode, "sequential|parallel");
    cmd->add_option("--workers", workers_flag, "worker pool size for parallel training");
    cmd->add_option("--seed", opt.seed, "base seed");
    cmd->add_option("--reps", opt.reps, "repetitions per configuration");
    cmd->add_option("--tau", opt.tau, "growth threshold multiplier");
    cmd->add_option("--max-depth", opt.max_depth, "maximum SOM levels");
    cmd->add_option("--split", opt.split, "training fraction in (0,1)");
    cmd->add_option("--out", opt.out, "output path");
    cmd->add_option("--format", opt.format, "report format: json|csv");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical self-organizing map trainer for binary intrusion detection"};
    app.require_subcommand(1);

    Options opt;
    std::string config_path;
    std::string grid_text;
    std::optional<std::size_t> workers_flag;

    CLI::App* train = app.add_subcommand("train", "train one model and evaluate the held-out split");
    add_common_flags(train, opt, config_path, grid_text, workers_flag);

    CLI::App* predict = app.add_subcommand("predict", "label a CSV with a saved model");
    predict->add_option("--model", opt.model_path, "model file")->required();
    predict->add_option("--dataset", opt.dataset, "input CSV")->required();
    predict->add_option("--label-column", opt.label_column, "label column to ignore");
    predict->add_option("--out", opt.out, "predictions CSV path");

    CLI::App* bench = app.add_subcommand(
        "bench", "sequential vs parallel sweep over grid sizes with speedup report");
    add_common_flags(bench, opt, config_path, grid_text, workers_flag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "hsom: error[config]: " << e.what() << "\n";
        return 2;
    }

    try {
        // config file first, then flag overrides on a fresh pass
        if (!config_path.empty()) {
            Options from_config;
            apply_config_file(from_config, config_path);
            // overlay: any flag the user actually passed wins
            CLI::App* active = app.get_subcommands().front();
            auto passed = [&](const std::string& name) {
                const CLI::Option* o = active->get_option_no_throw(name);
                return o != nullptr && o->count() > 0;
            };
            if (!passed("--dataset") && !opt.synthetic) opt.dataset = from_config.dataset;
            if (!passed("--synthetic") && !opt.dataset) opt.synthetic = from_config.synthetic;
            if (!passed("--label-column")) opt.label_column = from_config.label_column;
            opt.zero_labels = from_config.zero_labels;
            opt.one_labels = from_config.one_labels;
            opt.delimiter = from_config.delimiter;
            if (!passed("--grid") && grid_text.empty()) opt.grids = from_config.grids;
            if (!passed("--mode")) opt.mode = from_config.mode;
            if (!workers_flag) opt.workers = from_config.workers;
            if (!passed("--seed")) opt.seed = from_config.seed;
            if (!passed("--reps")) opt.reps = from_config.reps;
            if (!passed("--tau")) opt.tau = from_config.tau;
            if (!passed("--max-depth")) opt.max_depth = from_config.max_depth;
            if (!passed("--split")) opt.split = from_config.split;
            opt.sched = from_config.sched;
            if (!passed("--out") && opt.out.empty()) opt.out = from_config.out;
            if (!passed("--format")) opt.format = from_config.format;
        }
        if (!grid_text.empty()) opt.grids = parse_grid_list(grid_text);
        if (!(opt.split > 0.0 && opt.split < 1.0))
            throw hsom::InvalidInput("--split must lie in (0,1)");
        if (opt.reps < 1) throw hsom::InvalidInput("--reps must be >= 1");

        const std::size_t workers = resolve_worker_count(workers_flag, opt.workers);

        if (train->parsed()) return cmd_train(opt, workers);
        if (predict->parsed()) return cmd_predict(opt);
        if (bench->parsed()) return cmd_bench(opt, workers);
        throw hsom::InvalidInput("no subcommand given");
    } catch (const hsom::TrainingFailed& e) {
        std::cerr << "hsom: error[train]: " << e.what() << "\n";
        return 4;
    } catch (const hsom::IoError& e) {
        std::cerr << "hsom: error[io]: " << e.what() << "\n";
        return 3;
    } catch (const hsom::InvalidInput& e) {
        std::cerr << "hsom: error[config]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hsom: error[internal]: " << e.what() << "\n";
        return 1;
    }
}
