// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "wca/classifier.hpp"
#include "wca/embedding_store.hpp"
#include "wca/encoder.hpp"
#include "wca/error.hpp"
#include "wca/evaluation.hpp"
#include "wca/fixtures.hpp"
#include "wca/kernels.hpp"
#include "wca/theorem_lab.hpp"

namespace wca::cli {

namespace {

struct Options {
    std::string manifest;
    std::string descriptions;
    std::string embeddings;
    std::string model;
    std::string agg = "wca";
    std::optional<double> lambda;
    double alpha = 0.5;
    double beta = 0.9;
    std::size_t crops = 60;
    std::size_t max_descriptions = kDefaultMaxDescriptions;
    std::string label_template{kDefaultTemplate};
    std::optional<std::uint64_t> seed;
    std::string cache;
    std::string out;
    std::size_t jobs = 0;
    bool explain = false;
    std::string prompt_style = "crop";

    std::string image;
    std::size_t repeats = 1;
    std::vector<std::size_t> crop_counts{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

    std::size_t trials = 10000;
    std::optional<std::size_t> dim;
    std::size_t d_in = 8;
    std::size_t d_out = 8;
    double cos2_max = 0.9;
    double norm_floor = 0.1;
};

std::uint64_t resolve_seed(const Options& o) {
    if (o.seed) return *o.seed;
    const char* env = std::getenv("WCA_SEED");
    if (!env || !*env) return 0;
    const std::string s(env);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.front() == '-') throw ConfigError("WCA_SEED='" + s + "' is not an unsigned integer");
    return v;
}

std::size_t resolve_jobs(const Options& o) {
    if (o.jobs > 0) return o.jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig run_config(const Options& o) {
    RunConfig cfg;
    cfg.aggregation = parse_aggregation(o.agg);
    cfg.prompt.alpha = o.alpha;
    cfg.prompt.beta = o.beta;
    cfg.prompt.num_crops = o.crops;
    cfg.prompt.seed = resolve_seed(o);
    cfg.prompt.style = parse_prompt_style(o.prompt_style);
    cfg.lambda = o.lambda;
    cfg.explain = o.explain;
    cfg.validate();
    return cfg;
}

// "projection" or "projection:<dim>".
std::unique_ptr<EncoderBackend> make_model(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    if (name != "projection")
        throw ConfigError("--model '" + spec + "': the only built-in model is 'projection[:dim]'");
    std::size_t dim = 64;
    if (colon != std::string::npos) {
        const std::string d = spec.substr(colon + 1);
        std::size_t used = 0;
        try {
            dim = std::stoul(d, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != d.size() || dim == 0) throw ConfigError("--model '" + spec + "': bad dimension");
    }
    return std::make_unique<ProjectionEncoder>(dim, 0);
}

struct Backend {
    std::unique_ptr<EncoderBackend> encoder;
    std::string name;
};

Backend make_backend(const Options& o, bool required) {
    if (!o.embeddings.empty()) {
        auto store = std::make_shared<const PrecomputedStore>(read_embedding_file(o.embeddings));
        return {std::make_unique<PrecomputedBackend>(std::move(store)), "embeddings"};
    }
    if (!o.model.empty()) return {make_model(o.model), "model:" + o.model};
    if (required) throw ConfigError("one of --embeddings or --model is required");
    return {};
}

RunDescription describe(const Options& o, const RunConfig& cfg, const std::string& backend) {
    return {cfg, o.max_descriptions, o.label_template, backend};
}

LabelCatalog catalog_for(const Options& o) {
    return load_descriptions(o.descriptions, o.max_descriptions, o.label_template);
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write --out '" + o.out + "'");
    f << text;
    if (!f) throw IoError("failed writing --out '" + o.out + "'");
}

void log_timing(std::ostream& err, const EvalReport& r) {
    err << "wca: " << r.n << " images, top1=" << r.top1 << ", wall " << r.wall_seconds << " s (crop+preprocess "
        << r.timing.crop_preprocess_seconds << " s, encode " << r.timing.encode_seconds << " s, score "
        << r.timing.score_seconds << " s)\n";
}

// --- subcommands -------------------------------------------------------------

int do_classify(const Options& o, std::ostream& out) {
    const RunConfig cfg = run_config(o);
    const LabelCatalog catalog = catalog_for(o);
    const Backend backend = make_backend(o, true);
    const Classifier clf(catalog, *backend.encoder, cfg);
    ClassificationReport report;
    if (backend.encoder->wants_pixels()) {
        const ImageBuffer img = load_image(o.image);
        report = clf.classify(o.image, &img);
    } else {
        report = clf.classify(o.image);
    }
    emit(o, out, classification_json(report).dump(2) + "\n");
    return kExitOk;
}

int do_eval(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.explain) throw ConfigError("--explain applies to classify only");
    RunConfig cfg = run_config(o);
    const LabelCatalog catalog = catalog_for(o);
    const DatasetManifest manifest = load_manifest(o.manifest);

    if (!o.cache.empty()) {
        if (o.repeats != 1) throw ConfigError("--repeats cannot be combined with --cache");
        const Backend backend = make_backend(o, false);
        std::optional<std::size_t> dim;
        if (backend.encoder) dim = backend.encoder->dim();
        const EvalReport r = evaluate_cached(manifest, catalog, o.cache, describe(o, cfg, "cache"), dim);
        log_timing(err, r);
        emit(o, out, report_json(r).dump(2) + "\n");
        return kExitOk;
    }

    const Backend backend = make_backend(o, true);
    const EvalOptions opts{resolve_jobs(o)};
    if (o.repeats == 1) {
        const EvalReport r = evaluate(manifest, catalog, *backend.encoder, describe(o, cfg, backend.name), opts);
        log_timing(err, r);
        emit(o, out, report_json(r).dump(2) + "\n");
        return kExitOk;
    }

    // Spread over crop reseeding only; embeddings, descriptions and the
    // manifest stay fixed.
    if (!backend.encoder->wants_pixels())
        err << "wca: precomputed patch embeddings do not depend on the seed; expect zero spread\n";
    const std::uint64_t base = cfg.prompt.seed;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    nlohmann::ordered_json top1 = nlohmann::ordered_json::array();
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < o.repeats; ++r) {
        cfg.prompt.seed = base + r;
        const EvalReport rep = evaluate(manifest, catalog, *backend.encoder, describe(o, cfg, backend.name), opts);
        log_timing(err, rep);
        seeds.push_back(cfg.prompt.seed);
        top1.push_back(rep.top1);
        sum += rep.top1;
        sum_sq += rep.top1 * rep.top1;
    }
    const double n = static_cast<double>(o.repeats);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    cfg.prompt.seed = base;
    nlohmann::ordered_json j;
    j["variance_source"] = "crop reseeding only";
    j["repeats"] = o.repeats;
    j["seeds"] = std::move(seeds);
    j["top1"] = std::move(top1);
    j["mean"] = mean;
    j["std"] = std::sqrt(var);
    j["config"] = run_config_json(describe(o, cfg, backend.name));
    emit(o, out, j.dump(2) + "\n");
    return kExitOk;
}

int do_cache(const Options& o, std::ostream& err) {
    if (o.explain) throw ConfigError("--explain applies to classify only");
    const RunConfig cfg = run_config(o);
    const LabelCatalog catalog = catalog_for(o);
    const DatasetManifest manifest = load_manifest(o.manifest);
    const Backend backend = make_backend(o, true);
    precompute_cache(manifest, catalog, *backend.encoder, describe(o, cfg, backend.name), o.cache,
                     EvalOptions{resolve_jobs(o)});
    err << "wca: cached " << manifest.records.size() << " images and " << catalog.size() << " classes to "
        << o.cache << "\n";
    return kExitOk;
}

int do_bench(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = run_config(o);
    const LabelCatalog catalog = catalog_for(o);
    const DatasetManifest manifest = load_manifest(o.manifest);
    const Backend backend = make_backend(o, true);
    std::vector<std::pair<std::string, ImageBuffer>> images;
    for (const auto& rec : manifest.records) images.emplace_back(rec.id, load_image(manifest.root / rec.id));
    const auto rows = bench_timing(images, catalog, *backend.encoder, cfg, o.crop_counts);
    for (std::size_t i = 2; i < rows.size(); ++i)
        if (rows[i].crops > rows[i - 1].crops && rows[i].crop_preprocess_s < rows[i - 1].crop_preprocess_s)
            err << "wca: crop+preprocess time is not monotone in N between N=" << rows[i - 1].crops
                << " and N=" << rows[i].crops << "\n";
    emit(o, out, bench_csv(rows));
    return kExitOk;
}

int do_theorem(const Options& o, std::ostream& out, std::ostream& err) {
    ConstructionOptions c;
    c.d_in = o.dim.value_or(o.d_in);
    c.d_out = o.dim.value_or(o.d_out);
    c.cos2_max = o.cos2_max;
    c.min_component_norm = o.norm_floor;
    const ProbeSummary s = counterexample_probe(resolve_seed(o), o.trials, c);
    emit(o, out, probe_json(s).dump(2) + "\n");
    if (s.violations > 0 || s.linearity_failures > 0) {
        err << "wca: " << s.violations << " instances reached cosine 1 - " << kTheoremGap << " and "
            << s.linearity_failures << " failed the linearity check\n";
        return kExitUsage;
    }
    return kExitOk;
}

int do_gen_fixtures(const Options& o, std::ostream& err) {
    if (o.out.empty()) throw ConfigError("gen-fixtures needs --out <directory>");
    const std::uint64_t seed = resolve_seed(o);
    generate_fixtures(seed, o.out);
    err << "wca: fixtures for seed " << seed << " written to " << o.out << "\n";
    return kExitOk;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
        case ErrorKind::Format:
        case ErrorKind::Ingestion:
        case ErrorKind::Missing:
        case ErrorKind::CacheInvalid:
            return kExitData;
        default:
            return kExitUsage;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Weighted visual-text cross alignment for zero-shot classification", "wca"};
    app.require_subcommand(1);

    auto* classify = app.add_subcommand("classify", "Classify one image and print per-class scores");
    auto* eval = app.add_subcommand("eval", "Top-1 accuracy over a manifest");
    auto* cache = app.add_subcommand("cache", "Precompute augmented embeddings for a manifest");
    auto* bench = app.add_subcommand("bench", "Per-image timing for several crop counts (CSV)");
    auto* theorem = app.add_subcommand("theorem", "Probe the linear-encoder misalignment result");
    auto* gen = app.add_subcommand("gen-fixtures", "Write seeded fixtures and reference outputs");

    const std::vector<std::string> aggs{"wca", "avg", "max", "llm", "clip", "clip-e", "mixed"};
    const std::vector<std::string> styles{"crop", "red-circle", "blur", "greyscale"};

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--descriptions", o.descriptions, "Class name -> descriptions JSON")->required();
        auto* emb = sub->add_option("--embeddings", o.embeddings, "WEM1 embedding store");
        auto* model = sub->add_option("--model", o.model, "Built-in pixel encoder: projection[:dim]");
        emb->excludes(model);
        sub->add_option("--agg", o.agg, "Aggregation")->check(CLI::IsMember(aggs));
        sub->add_option("--lambda", o.lambda, "Whole-image weight for --agg mixed");
        sub->add_option("--alpha", o.alpha, "Smallest crop fraction");
        sub->add_option("--beta", o.beta, "Largest crop fraction");
        sub->add_option("--crops", o.crops, "Crops per image");
        sub->add_option("--max-descriptions", o.max_descriptions, "Descriptions kept per class");
        sub->add_option("--template", o.label_template, "Label prompt template with one {}");
        sub->add_option("--seed", o.seed, "Crop seed (default: $WCA_SEED or 0)");
        sub->add_option("--prompt-style", o.prompt_style, "Visual prompt")->check(CLI::IsMember(styles));
        sub->add_option("--out", o.out, "Output file (default: stdout)");
    };
    for (auto* sub : {classify, eval, cache, bench}) add_run_flags(sub);

    classify->add_option("--image", o.image, "Image id (--embeddings) or file (--model)")->required();
    classify->add_flag("--explain", o.explain, "Per-description contributions for the top two classes");

    for (auto* sub : {eval, cache, bench}) sub->add_option("--manifest", o.manifest, "JSONL manifest")->required();
    for (auto* sub : {eval, cache}) {
        sub->add_option("--jobs", o.jobs, "Worker threads (default: all cores)");
        sub->add_flag("--explain", o.explain, "Only valid for classify");
    }
    eval->add_option("--cache", o.cache, "Score from a cache written by `wca cache`");
    eval->add_option("--repeats", o.repeats, "Re-run with seeds seed..seed+R-1 and report the spread")
        ->check(CLI::PositiveNumber);
    cache->add_option("--cache", o.cache, "Cache file to write")->required();
    bench->add_option("--crop-counts", o.crop_counts, "Crop counts to time besides N=0")->delimiter(',');

    theorem->add_option("--trials", o.trials, "Random instances");
    theorem->add_option("--dim", o.dim, "Sets both --d-in and --d-out");
    theorem->add_option("--d-in", o.d_in, "Encoder input dim");
    theorem->add_option("--d-out", o.d_out, "Encoder output dim");
    theorem->add_option("--cos2-max", o.cos2_max, "Upper bound on cos(f(x2), g_y)");
    theorem->add_option("--norm-floor", o.norm_floor, "Minimum norm of x1 and x2");
    theorem->add_option("--seed", o.seed, "Probe seed (default: $WCA_SEED or 0)");
    theorem->add_option("--out", o.out, "Output file (default: stdout)");

    gen->add_option("--seed", o.seed, "Fixture seed (default: $WCA_SEED or 0)");
    gen->add_option("--out", o.out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        err << "wca: kernels=" << kernels::active().name << "\n";
        if (*classify) return do_classify(o, out);
        if (*eval) return do_eval(o, out, err);
        if (*cache) return do_cache(o, err);
        if (*bench) return do_bench(o, out, err);
        if (*theorem) return do_theorem(o, out, err);
        if (*gen) return do_gen_fixtures(o, err);
    } catch (const Error& e) {
        err << "wca: error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "wca: error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace wca::cli
