#include "adnpca/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adnpca/error.hpp"
#include "adnpca/eval.hpp"
#include "adnpca/featstore.hpp"
#include "adnpca/gaussian.hpp"
#include "adnpca/heuristics.hpp"
#include "adnpca/io.hpp"
#include "adnpca/report.hpp"
#include "adnpca/synthgen.hpp"

namespace adnpca::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunManifest = "run.json";
const std::vector<std::string> kHeuristicOrder{"ratio", "kstest", "reldist"};

std::string slug(const std::string& category) {
    if (category.empty()) return "default";
    std::string out;
    for (char c : category) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
        out += keep ? c : '_';
    }
    return out;
}

std::string artifact_stem(const std::string& prefix, const std::string& category, int stage) {
    return prefix + "_" + slug(category) + "_stage" + std::to_string(stage);
}

fs::path model_path(const fs::path& dir, const std::string& category, int stage) {
    return dir / (artifact_stem("model", category, stage) + ".json");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorKind::IoFailure, "cannot create directory '" + dir.string() + "'");
    }
}

void require_exists(const fs::path& p, const char* what) {
    if (!fs::exists(p)) {
        throw Error(ErrorKind::IoFailure, std::string(what) + " '" + p.string() + "' does not exist");
    }
}

// A manifest, or a single feature file wrapped as a one-entry manifest.
DatasetManifest load_features(const fs::path& path) {
    require_exists(path, "features");
    if (path.extension() == ".json") {
        return read_manifest(path);
    }
    const FeatureMatrix m = read_feature_matrix(path);
    DatasetManifest manifest;
    manifest.category = m.category;
    manifest.stages.push_back({m.stage, path, m.split});
    return manifest;
}

std::vector<int> selected_stages(const std::vector<int>& available, const std::vector<int>& filter) {
    if (filter.empty()) return available;
    std::vector<int> out;
    for (int s : filter) {
        if (std::find(available.begin(), available.end(), s) == available.end()) {
            throw Error(ErrorKind::InvalidArgument, "stage " + std::to_string(s) + " is not in the inputs");
        }
        out.push_back(s);
    }
    return out;
}

FeatureMatrix load_entry(const DatasetManifest& manifest, const ManifestEntry& entry) {
    FeatureMatrix m = read_feature_matrix(entry.file);
    if (m.category.empty()) m.category = manifest.category;
    m.stage = entry.stage;
    m.split = entry.split;
    return m;
}

std::string category_of(const DatasetManifest& manifest) {
    return manifest.category;
}

void register_artifact(const fs::path& out_dir, json entry) {
    const fs::path path = out_dir / kRunManifest;
    json run = {{"tool", "adnpca"}, {"artifacts", json::array()}};
    if (fs::exists(path)) {
        try {
            run = json::parse(io::read_file(path));
        } catch (const json::exception&) {
            throw Error(ErrorKind::MalformedFile, "bad run manifest '" + path.string() + "'");
        }
    }
    json kept = json::array();
    for (const auto& a : run["artifacts"]) {
        if (a.value("path", std::string{}) != entry.value("path", std::string{})) kept.push_back(a);
    }
    kept.push_back(std::move(entry));
    std::vector<json> sorted(kept.begin(), kept.end());
    std::sort(sorted.begin(), sorted.end(), [](const json& a, const json& b) {
        return a.value("path", std::string{}) < b.value("path", std::string{});
    });
    run["artifacts"] = sorted;
    io::write_file_atomic(path, run.dump(2) + "\n");
}

// ---------------------------------------------------------------- fit

struct FitOptions {
    fs::path features;
    fs::path model_dir;
    std::vector<int> stages;
    double shrinkage = kDefaultShrinkage;
    bool full_sigma = false;
};

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
    const DatasetManifest manifest = load_features(opt.features);
    ensure_dir(opt.model_dir);
    int fitted = 0;
    for (int stage : selected_stages(manifest.stage_ids(), opt.stages)) {
        const ManifestEntry* entry = manifest.find(stage, Split::Train);
        if (entry == nullptr) continue;
        const FeatureMatrix train = load_entry(manifest, *entry);
        if (stage >= 0 && stage < static_cast<int>(kStageChannels.size()) && !validate_stage_dims(train)) {
            err << "warning: stage " << stage << " has d = " << train.cols() << ", EfficientNet-B4 has "
                << stage_channels(stage) << " channels\n";
        }
        const GaussianModel model = fit_gaussian(train, opt.shrinkage);
        for (const auto& w : fit_warnings(model)) err << "warning: stage " << stage << ": " << w << '\n';
        const SpectralModel spectral = spectral_decompose(model);
        const fs::path path = model_path(opt.model_dir, model.category, stage);
        save_model(spectral, path, opt.full_sigma);
        out << "fit " << slug(model.category) << " stage " << stage << ": n=" << model.n_fit
            << " d=" << model.dim() << " lambda_min=" << io::format_double(spectral.eigenvalues[0])
            << " -> " << path.string() << '\n';
        ++fitted;
    }
    if (fitted == 0) {
        throw Error(ErrorKind::InvalidArgument, "no train split found in '" + opt.features.string() + "'");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    fs::path features;
    fs::path model_dir;
    fs::path out;
    std::vector<int> stages;
    unsigned threads = 1;
    bool plot = false;
};

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream&) {
    const DatasetManifest manifest = load_features(opt.features);
    require_exists(opt.model_dir, "model directory");
    ensure_dir(opt.out);
    int swept = 0;
    for (int stage : selected_stages(manifest.stage_ids(), opt.stages)) {
        const ManifestEntry* normal = manifest.find(stage, Split::TestNormal);
        const ManifestEntry* anom = manifest.find(stage, Split::TestAnomalous);
        if (normal == nullptr && anom == nullptr) continue;
        if (normal == nullptr || anom == nullptr) {
            throw Error(ErrorKind::EmptyClass, "stage " + std::to_string(stage) + " lacks " +
                                                   (normal == nullptr ? "normal" : "anomalous") + " test features");
        }
        const FeatureMatrix fn = load_entry(manifest, *normal);
        const FeatureMatrix fa = load_entry(manifest, *anom);
        const SpectralModel spectral = load_model(model_path(opt.model_dir, fn.category, stage));
        const WhitenedMatrix wn = whiten(spectral, fn);
        const WhitenedMatrix wa = whiten(spectral, fa);

        SweepResult sweep = sweep_k(wn, wa, opt.threads);
        sweep.category = fn.category;
        sweep.stage = stage;

        const std::string stem = artifact_stem("sweep", fn.category, stage);
        io::write_file_atomic(opt.out / (stem + ".csv"), sweep_to_csv(sweep));
        io::write_file_atomic(opt.out / (stem + ".json"), sweep_to_json(sweep).dump(2) + "\n");

        std::vector<double> scores;
        std::vector<bool> labels;
        const Index k = sweep.k_star;
        for (const auto* w : {&wn, &wa}) {
            for (Index i = 0; i < w->rows(); ++i) {
                scores.push_back(w->data.row(i).head(k).squaredNorm() / static_cast<double>(k));
                labels.push_back(w == &wa);
            }
        }
        io::write_file_atomic(opt.out / (artifact_stem("roc", fn.category, stage) + "_kstar.csv"),
                              roc_to_csv(roc_curve(scores, labels)));
        if (opt.plot) {
            PlotSeries s{"auroc", {}, sweep.auroc_per_k, "#1f77b4"};
            for (Index kk : sweep.ks) s.x.push_back(static_cast<double>(kk));
            io::write_file_atomic(opt.out / (stem + ".svg"),
                                  svg_line_plot(slug(fn.category) + " stage " + std::to_string(stage), {s},
                                                {{static_cast<double>(sweep.k_star), "k*", "#d62728"}}));
        }
        register_artifact(opt.out, {{"kind", "sweep"}, {"category", fn.category}, {"stage", stage},
                                    {"path", stem + ".json"}});
        out << "sweep " << slug(fn.category) << " stage " << stage << ": k_star=" << sweep.k_star
            << " auroc=" << io::format_double(sweep.auroc_star) << '\n';
        ++swept;
    }
    if (swept == 0) {
        throw Error(ErrorKind::EmptyClass, "no stage has both normal and anomalous test features");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- heuristic

struct HeuristicOptions {
    std::string method;
    fs::path features;
    fs::path model_dir;
    fs::path out;
    std::vector<int> stages;
    double tolerance = kDefaultTolerance;
    bool ratio_literal = false;
    bool stephens = false;
    std::string selection;
    bool plot = false;
};

std::pair<FeatureMatrix, FeatureMatrix> resolve_pairing(const DatasetManifest& manifest, int stage) {
    const ManifestEntry* synth = manifest.find(stage, Split::Synthetic);
    if (synth == nullptr) {
        throw Error(ErrorKind::PairingMismatch, "stage " + std::to_string(stage) + " has no synthetic split");
    }
    FeatureMatrix s = load_entry(manifest, *synth);
    for (Split split : {Split::TestNormal, Split::Train}) {
        const ManifestEntry* normal = manifest.find(stage, split);
        if (normal == nullptr) continue;
        FeatureMatrix n = load_entry(manifest, *normal);
        try {
            (void)pairing_order(n.image_ids, s.image_ids, *manifest.pairing);
            return {std::move(n), std::move(s)};
        } catch (const Error&) {
        }
    }
    throw Error(ErrorKind::PairingMismatch,
                "pairing does not match any normal split of stage " + std::to_string(stage));
}

int cmd_heuristic(const HeuristicOptions& opt, std::ostream& out, std::ostream&) {
    if (opt.method != "ratio" && opt.method != "kstest" && opt.method != "reldist") {
        throw Error(ErrorKind::InvalidArgument, "unknown method '" + opt.method + "'");
    }
    require_exists(opt.model_dir, "model directory");
    std::optional<DatasetManifest> manifest;
    if (!opt.features.empty()) {
        manifest = load_features(opt.features);
    } else if (opt.method != "ratio") {
        throw Error(ErrorKind::InvalidArgument, "--features is required for --method " + opt.method);
    }
    if (opt.method == "reldist" && !manifest->pairing) {
        throw Error(ErrorKind::PairingMismatch, "--method reldist requires a pairing in the manifest");
    }
    ensure_dir(opt.out);

    // (category, stage) pairs to evaluate
    std::vector<std::pair<std::string, int>> targets;
    if (manifest) {
        for (int stage : selected_stages(manifest->stage_ids(), opt.stages)) {
            targets.emplace_back(category_of(*manifest), stage);
        }
    } else {
        for (const auto& e : fs::directory_iterator(opt.model_dir)) {
            const std::string name = e.path().filename().string();
            if (name.rfind("model_", 0) != 0 || e.path().extension() != ".json") continue;
            const SpectralModel m = load_model(e.path());
            if (opt.stages.empty() ||
                std::find(opt.stages.begin(), opt.stages.end(), m.source.stage) != opt.stages.end()) {
                targets.emplace_back(m.source.category, m.source.stage);
            }
        }
        std::sort(targets.begin(), targets.end());
    }
    if (targets.empty()) {
        throw Error(ErrorKind::InvalidArgument, "nothing to evaluate");
    }

    for (const auto& [category, stage] : targets) {
        const SpectralModel spectral = load_model(model_path(opt.model_dir, category, stage));
        HeuristicCurve curve;
        std::optional<HeuristicCurve> differential;
        std::string default_rule = "argmax";

        if (opt.method == "ratio") {
            curve = eigenvalue_ratio_curve(spectral, opt.ratio_literal);
        } else if (opt.method == "kstest") {
            const ManifestEntry* train = manifest->find(stage, Split::Train);
            if (train == nullptr) {
                throw Error(ErrorKind::InvalidArgument, "kstest needs the train split of stage " + std::to_string(stage));
            }
            const WhitenedMatrix w = whiten(spectral, load_entry(*manifest, *train));
            curve = normality_curve(w, opt.stephens ? KsCorrection::Stephens : KsCorrection::None);
            default_rule = "tolerance";
        } else {
            auto [normal, synth] = resolve_pairing(*manifest, stage);
            curve = relative_distance_curve(whiten(spectral, normal), whiten(spectral, synth), *manifest->pairing);
            differential = differential_curve(curve);
        }
        curve.meta = {category, stage};
        if (differential) differential->meta = curve.meta;

        const HeuristicCurve& target = differential ? *differential : curve;
        const std::string rule = opt.selection.empty() ? default_rule : opt.selection;
        const Selection sel = rule == "tolerance" ? select_k_tolerance(target, opt.tolerance) : select_k_argmax(target);

        const std::string stem = artifact_stem("heuristic_" + opt.method, category, stage);
        std::string csv = curve_to_csv(curve);
        if (differential) {
            const std::string extra = curve_to_csv(*differential);
            csv += extra.substr(extra.find('\n') + 1);
        }
        io::write_file_atomic(opt.out / (stem + ".csv"), csv);

        json report = {{"heuristic", opt.method},
                       {"category", category},
                       {"stage", stage},
                       {"curve", curve_to_json(curve)},
                       {"selected_on", std::string(to_string(target.method))},
                       {"selection", selection_to_json(sel)},
                       {"ratio_literal", opt.ratio_literal}};
        report["differential"] = differential ? curve_to_json(*differential) : json(nullptr);
        report["regret"] = nullptr;
        const fs::path sweep_path = opt.out / (artifact_stem("sweep", category, stage) + ".json");
        if (fs::exists(sweep_path)) {
            const SweepResult sweep = sweep_from_json(json::parse(io::read_file(sweep_path)));
            report["regret"] = regret_to_json(regret(sweep, sel, opt.method));
        }
        io::write_file_atomic(opt.out / (stem + ".json"), report.dump(2) + "\n");
        if (opt.plot) {
            PlotSeries s{std::string(to_string(target.method)), {}, target.values, "#2ca02c"};
            for (Index k : target.ks) s.x.push_back(static_cast<double>(k));
            io::write_file_atomic(opt.out / (stem + ".svg"),
                                  svg_line_plot(opt.method + " " + slug(category) + " stage " + std::to_string(stage),
                                                {s}, {{static_cast<double>(sel.k_tilde), "k~", "#2ca02c"}}));
        }
        register_artifact(opt.out, {{"kind", "heuristic"}, {"heuristic", opt.method}, {"category", category},
                                    {"stage", stage}, {"path", stem + ".json"}});
        out << "heuristic " << opt.method << ' ' << slug(category) << " stage " << stage
            << ": k_tilde=" << sel.k_tilde;
        if (!report["regret"].is_null()) out << " regret=" << io::format_double(report["regret"]["regret"].get<double>());
        out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const BenchmarkSpec& spec, const fs::path& out_dir, std::ostream& out) {
    validate(spec);
    const Benchmark b = generate_benchmark(spec);
    const fs::path manifest = write_benchmark(b, spec, out_dir);
    register_artifact(out_dir, {{"kind", "benchmark"}, {"category", spec.category}, {"stage", spec.stage},
                                {"path", "manifest.json"}});
    out << "synth seed " << spec.seed << ": d=" << spec.d << " k_true=" << spec.k_true << " -> "
        << manifest.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
    fs::path out;
    bool plot = false;
};

int cmd_report(const ReportOptions& opt, std::ostream& out) {
    require_exists(opt.out, "output directory");
    std::vector<fs::path> sweep_files;
    std::vector<fs::path> heuristic_files;
    const fs::path run_path = opt.out / kRunManifest;
    if (fs::exists(run_path)) {
        const json run = json::parse(io::read_file(run_path));
        for (const auto& a : run.at("artifacts")) {
            const std::string kind = a.value("kind", std::string{});
            const fs::path p = opt.out / a.at("path").get<std::string>();
            if (!fs::exists(p)) continue;
            if (kind == "sweep") sweep_files.push_back(p);
            if (kind == "heuristic") heuristic_files.push_back(p);
        }
    } else {
        for (const auto& e : fs::directory_iterator(opt.out)) {
            const std::string name = e.path().filename().string();
            if (e.path().extension() != ".json") continue;
            if (name.rfind("sweep_", 0) == 0) sweep_files.push_back(e.path());
            if (name.rfind("heuristic_", 0) == 0) heuristic_files.push_back(e.path());
        }
        std::sort(sweep_files.begin(), sweep_files.end());
        std::sort(heuristic_files.begin(), heuristic_files.end());
    }
    if (sweep_files.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no sweep reports in '" + opt.out.string() + "'");
    }
    if (heuristic_files.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no heuristic reports in '" + opt.out.string() + "'");
    }

    std::map<std::pair<std::string, int>, SweepResult> sweeps;
    for (const auto& p : sweep_files) {
        SweepResult s = sweep_from_json(json::parse(io::read_file(p)));
        sweeps[{s.category, s.stage}] = std::move(s);
    }
    std::map<std::pair<std::string, int>, ReportRow> rows;
    for (const auto& [key, s] : sweeps) {
        rows[key] = ReportRow{s.category, s.stage, s.k_star, s.auroc_star, {}};
    }
    std::set<std::string> present;
    for (const auto& p : heuristic_files) {
        const json h = json::parse(io::read_file(p));
        const std::pair<std::string, int> key{h.at("category").get<std::string>(), h.at("stage").get<int>()};
        auto it = sweeps.find(key);
        if (it == sweeps.end()) continue;
        const std::string name = h.at("heuristic").get<std::string>();
        const Selection sel = selection_from_json(h.at("selection"));
        const RegretEntry e = regret(it->second, sel, name);
        rows[key].by_heuristic[name] = e;
        present.insert(name);

        if (opt.plot) {
            const json& cj = h.at("differential").is_null() ? h.at("curve") : h.at("differential");
            const HeuristicCurve c = curve_from_json(cj);
            PlotSeries hs{name + " " + std::string(to_string(c.method)), {}, c.values, "#2ca02c"};
            for (Index k : c.ks) hs.x.push_back(static_cast<double>(k));
            PlotSeries as{"auroc", {}, it->second.auroc_per_k, "#1f77b4"};
            for (Index k : it->second.ks) as.x.push_back(static_cast<double>(k));
            io::write_file_atomic(
                opt.out / (artifact_stem("overlay_" + name, key.first, key.second) + ".svg"),
                svg_line_plot(name + " vs auroc, " + slug(key.first) + " stage " + std::to_string(key.second),
                              {as, hs},
                              {{static_cast<double>(e.k_star), "k*", "#d62728"},
                               {static_cast<double>(e.k_tilde), "k~", "#2ca02c"}}));
        }
    }
    if (present.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no heuristic report matches a sweep");
    }

    std::vector<std::string> heuristics;
    for (const auto& h : kHeuristicOrder) {
        if (present.count(h)) heuristics.push_back(h);
    }
    std::vector<ReportRow> ordered;
    std::set<std::string> categories;
    for (auto& [key, row] : rows) {
        categories.insert(row.category);
        ordered.push_back(row);
    }
    for (const auto& category : categories) {
        const std::string md = report_markdown(category, ordered, heuristics);
        io::write_file_atomic(opt.out / ("report_" + slug(category) + ".md"), md);
        out << md << '\n';
    }
    io::write_file_atomic(opt.out / "report.csv", report_csv(ordered, heuristics));
    io::write_file_atomic(opt.out / "report.json", report_json(ordered).dump(2) + "\n");
    return kExitOk;
}

int exit_code_for(const Error& e) {
    return is_numerical(e.kind()) ? kExitNumericalFailure : kExitInputError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Negated-PCA anomaly detection toolkit", "adnpca"};
    app.require_subcommand(1);

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a Gaussian model per (category, stage) from train features");
    fit_cmd->add_option("--features", fit.features, "Dataset manifest (.json) or feature file")->required();
    fit_cmd->add_option("--model-dir", fit.model_dir, "Directory receiving the model files")->required();
    fit_cmd->add_option("--stage", fit.stages, "Restrict to these stages");
    fit_cmd->add_option("--shrinkage", fit.shrinkage, "Trace-scaled identity shrinkage in [0, 1)");
    fit_cmd->add_flag("--full-sigma", fit.full_sigma, "Store sigma even above d = 256");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "AUROC of the NPCA score for every k");
    sweep_cmd->add_option("--features", sweep.features, "Dataset manifest")->required();
    sweep_cmd->add_option("--model-dir", sweep.model_dir, "Directory holding fitted models")->required();
    sweep_cmd->add_option("--out", sweep.out, "Run output directory")->required();
    sweep_cmd->add_option("--stage", sweep.stages, "Restrict to these stages");
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads over k")->check(CLI::Range(1u, 256u));
    sweep_cmd->add_flag("--plot", sweep.plot, "Also emit SVG plots");

    HeuristicOptions heur;
    auto* heur_cmd = app.add_subcommand("heuristic", "Heuristic curve and k selection");
    heur_cmd->add_option("--method", heur.method, "ratio | kstest | reldist")
        ->required()
        ->check(CLI::IsMember({"ratio", "kstest", "reldist"}));
    heur_cmd->add_option("--features", heur.features, "Dataset manifest");
    heur_cmd->add_option("--model-dir", heur.model_dir, "Directory holding fitted models")->required();
    heur_cmd->add_option("--out", heur.out, "Run output directory")->required();
    heur_cmd->add_option("--stage", heur.stages, "Restrict to these stages");
    heur_cmd->add_option("--tolerance", heur.tolerance, "Band below the maximum for the tolerance rule")
        ->check(CLI::NonNegativeNumber);
    heur_cmd->add_flag("--ratio-literal", heur.ratio_literal, "Use lambda_m / lambda_{m+1} for the ratio curve");
    heur_cmd->add_flag("--stephens", heur.stephens, "Small-sample correction for the K-S p-value");
    heur_cmd->add_option("--selection", heur.selection, "argmax | tolerance (default depends on method)")
        ->check(CLI::IsMember({"argmax", "tolerance"}));
    heur_cmd->add_flag("--plot", heur.plot, "Also emit SVG plots");

    BenchmarkSpec spec;
    fs::path synth_out;
    bool no_rotate = false;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-subspace benchmark");
    synth_cmd->add_option("--out", synth_out, "Benchmark output directory")->required();
    synth_cmd->add_option("--seed", spec.seed, "RNG seed");
    synth_cmd->add_option("--d", spec.d, "Feature dimension");
    synth_cmd->add_option("--k-true", spec.k_true, "Planted anomalous-subspace size");
    synth_cmd->add_option("--gap", spec.gap, "Spectral gap above the planted block");
    synth_cmd->add_option("--offset", spec.offset, "Anomaly displacement in whitened sigma units");
    synth_cmd->add_option("--ramp", spec.ramp, "Geometric factor of the noise-floor eigenvalues");
    synth_cmd->add_option("--n-train", spec.n_train, "Training rows");
    synth_cmd->add_option("--n-test", spec.n_test, "Rows per test split");
    synth_cmd->add_option("--category", spec.category, "Category label");
    synth_cmd->add_option("--stage", spec.stage, "Stage label");
    synth_cmd->add_flag("--no-rotate", no_rotate, "Keep the planted eigenbasis axis-aligned");
    synth_cmd->add_flag("--fixed-direction", spec.fixed_direction, "Displace along the first planted axis only");

    ReportOptions report;
    auto* report_cmd = app.add_subcommand("report", "Consolidated k_star / k_tilde / regret table");
    report_cmd->add_option("--out", report.out, "Run output directory")->required();
    report_cmd->add_flag("--plot", report.plot, "Also emit heuristic-vs-auroc overlay plots");

    // deterministic commands accept --seed and ignore it
    std::uint64_t unused_seed = 0;
    for (auto* cmd : {fit_cmd, sweep_cmd, heur_cmd, report_cmd}) {
        cmd->add_option("--seed", unused_seed, "Ignored; this command draws no random numbers");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInputError;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit, out, err);
        if (*sweep_cmd) return cmd_sweep(sweep, out, err);
        if (*heur_cmd) return cmd_heuristic(heur, out, err);
        if (*synth_cmd) {
            spec.rotate = !no_rotate;
            return cmd_synth(spec, synth_out, out);
        }
        if (*report_cmd) return cmd_report(report, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        err << "error: MalformedFile: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumericalFailure;
    }
    return kExitInputError;
}

}  // namespace adnpca::cli
