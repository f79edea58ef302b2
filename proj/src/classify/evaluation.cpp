// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "wca/error.hpp"

namespace wca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Funnels calls to a backend that does not allow concurrent use.
class SerializedBackend final : public EncoderBackend {
public:
    explicit SerializedBackend(const EncoderBackend& inner) : inner_(inner) {}
    std::size_t dim() const override { return inner_.dim(); }
    bool wants_pixels() const override { return inner_.wants_pixels(); }
    bool concurrent_calls_allowed() const override { return true; }
    ImageBuffer preprocess(const ImageBuffer& img) const override {
        std::lock_guard lock(mu_);
        return inner_.preprocess(img);
    }
    Embedding encode_image(const ImageQuery& q) const override {
        std::lock_guard lock(mu_);
        return inner_.encode_image(q);
    }
    Embedding encode_text(const TextQuery& q) const override {
        std::lock_guard lock(mu_);
        return inner_.encode_text(q);
    }

private:
    const EncoderBackend& inner_;
    mutable std::mutex mu_;
};

/// Runs fn(i) for i in [0, n) on `jobs` threads. Returns per-index errors;
/// after the first failure remaining indices are skipped.
std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t jobs,
                                             const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return errors;
}

[[noreturn]] void rethrow_for_record(const std::exception_ptr& e, const std::string& id) {
    try {
        std::rethrow_exception(e);
    } catch (const Error& err) {
        throw Error(err.kind(), "image '" + id + "': " + err.what());
    }
}

void rethrow_first(const std::vector<std::exception_ptr>& errors, const DatasetManifest& manifest) {
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (errors[i]) rethrow_for_record(errors[i], manifest.records[i].id);
}

EvalReport aggregate(const DatasetManifest& manifest, const LabelCatalog& catalog,
                     std::vector<ClassificationReport> reports, const RunDescription& desc) {
    EvalReport r;
    r.description = desc;
    r.n = manifest.records.size();
    const std::size_t k = catalog.size();
    r.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (const auto& c : catalog.classes()) r.per_class.push_back({c.label, 0, 0});
    for (std::size_t i = 0; i < r.n; ++i) {
        const auto& rec = manifest.records[i];
        const std::size_t truth = *catalog.find(rec.label);
        const std::size_t pred = reports[i].predicted_index;
        r.confusion[truth][pred] += 1;
        r.per_class[truth].total += 1;
        if (truth == pred) {
            r.per_class[truth].correct += 1;
            r.correct += 1;
        }
        r.timing += reports[i].timing;
        r.predictions.push_back({rec.id, rec.label, reports[i].predicted_label, std::move(reports[i].scores)});
    }
    r.top1 = static_cast<double>(r.correct) / static_cast<double>(r.n);
    return r;
}

std::string read_text(const std::filesystem::path& path, const char* what) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(std::string("cannot open ") + what + " '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::filesystem::path sidecar_path(const std::filesystem::path& cache_path) {
    return std::filesystem::path(cache_path.string() + ".json");
}

}  // namespace

DatasetManifest parse_manifest(std::string_view jsonl, std::filesystem::path root) {
    DatasetManifest m;
    m.root = std::move(root);
    std::set<std::string> seen;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IngestionError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("label") || !j["id"].is_string() ||
            !j["label"].is_string())
            throw IngestionError("manifest line " + std::to_string(line_no) +
                                 ": expected {\"id\": string, \"label\": string}");
        ManifestRecord rec{j["id"].get<std::string>(), j["label"].get<std::string>()};
        if (rec.id.empty()) throw IngestionError("manifest line " + std::to_string(line_no) + ": empty id");
        if (!seen.insert(rec.id).second)
            throw IngestionError("manifest line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
        m.records.push_back(std::move(rec));
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const std::string text = read_text(path, "manifest");
    try {
        return parse_manifest(text, path.parent_path());
    } catch (const IngestionError& e) {
        throw IngestionError(path.string() + ": " + e.what());
    }
}

void check_manifest_labels(const DatasetManifest& manifest, const LabelCatalog& catalog) {
    for (const auto& rec : manifest.records)
        if (!catalog.find(rec.label))
            throw IngestionError("manifest record '" + rec.id + "' has label '" + rec.label +
                                 "' which is not in the description catalog");
}

EvalReport evaluate(const DatasetManifest& manifest, const LabelCatalog& catalog, const EncoderBackend& backend,
                    const RunDescription& desc, const EvalOptions& opts) {
    if (manifest.records.empty()) throw DomainError("manifest has no records");
    check_manifest_labels(manifest, catalog);
    const auto wall0 = Clock::now();

    std::optional<SerializedBackend> serialized;
    const EncoderBackend* be = &backend;
    if (!backend.concurrent_calls_allowed() && opts.jobs > 1) be = &serialized.emplace(backend);

    const Classifier clf(catalog, *be, desc.run);
    std::vector<ClassificationReport> reports(manifest.records.size());
    const auto errors = parallel_for(manifest.records.size(), opts.jobs, [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        if (be->wants_pixels()) {
            const ImageBuffer img = load_image(manifest.root / rec.id);
            reports[i] = clf.classify(rec.id, &img);
        } else {
            reports[i] = clf.classify(rec.id);
        }
    });
    rethrow_first(errors, manifest);
    EvalReport r = aggregate(manifest, catalog, std::move(reports), desc);
    r.wall_seconds = seconds_since(wall0);
    return r;
}

std::string cache_image_id(std::string_view image_id) { return "img::" + std::string(image_id); }
std::string cache_class_id(std::string_view label) { return "cls::" + std::string(label); }

void precompute_cache(const DatasetManifest& manifest, const LabelCatalog& catalog, const EncoderBackend& backend,
                      const RunDescription& desc, const std::filesystem::path& cache_path, const EvalOptions& opts) {
    if (desc.run.aggregation != Aggregation::Wca) throw ConfigError("caches hold WCA augmented vectors; use --agg wca");
    if (manifest.records.empty()) throw DomainError("manifest has no records");
    check_manifest_labels(manifest, catalog);

    std::optional<SerializedBackend> serialized;
    const EncoderBackend* be = &backend;
    if (!backend.concurrent_calls_allowed() && opts.jobs > 1) be = &serialized.emplace(backend);

    RunConfig run = desc.run;
    run.explain = false;
    const Classifier clf(catalog, *be, run);
    std::vector<std::optional<AugmentedEmbedding>> images(manifest.records.size());
    const auto errors = parallel_for(manifest.records.size(), opts.jobs, [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        if (be->wants_pixels()) {
            const ImageBuffer img = load_image(manifest.root / rec.id);
            images[i] = std::move(clf.prepare(rec.id, &img).augmented);
        } else {
            images[i] = std::move(clf.prepare(rec.id).augmented);
        }
    });
    rethrow_first(errors, manifest);

    PrecomputedStore store(static_cast<std::uint32_t>(backend.dim()), false);
    for (std::size_t i = 0; i < images.size(); ++i)
        store.insert(cache_image_id(manifest.records[i].id), images[i]->vector());
    for (std::size_t k = 0; k < catalog.size(); ++k)
        store.insert(cache_class_id(catalog[k].label), clf.class_augmented(k).vector());
    write_embedding_file(store, cache_path);

    auto side = run_config_json(desc);
    side["dim"] = backend.dim();
    std::ofstream f(sidecar_path(cache_path), std::ios::trunc);
    if (!f) throw IoError("cannot write cache sidecar '" + sidecar_path(cache_path).string() + "'");
    f << side.dump(2) << "\n";
}

EvalReport evaluate_cached(const DatasetManifest& manifest, const LabelCatalog& catalog,
                           const std::filesystem::path& cache_path, const RunDescription& desc,
                           std::optional<std::size_t> backend_dim) {
    if (desc.run.aggregation != Aggregation::Wca) throw ConfigError("--cache only supports --agg wca");
    if (desc.run.explain)
        throw ExplanationUnavailableError(
            "explanations need the explicit similarity matrix; rerun without --cache to use the slow path");
    if (manifest.records.empty()) throw DomainError("manifest has no records");
    check_manifest_labels(manifest, catalog);
    const auto wall0 = Clock::now();

    const PrecomputedStore cache = read_embedding_file(cache_path);
    if (backend_dim && *backend_dim != cache.dim())
        throw CacheInvalidError("cache '" + cache_path.string() + "' has dim " + std::to_string(cache.dim()) +
                                " but the backend has dim " + std::to_string(*backend_dim));
    const auto side_path = sidecar_path(cache_path);
    if (std::filesystem::exists(side_path)) {
        nlohmann::ordered_json side;
        try {
            side = nlohmann::ordered_json::parse(read_text(side_path, "cache sidecar"));
        } catch (const nlohmann::json::exception& e) {
            throw CacheInvalidError("cache sidecar '" + side_path.string() + "' is unreadable: " + e.what());
        }
        const auto want = run_config_json(desc);
        for (const char* key : {"crops", "alpha", "beta", "seed", "prompt_style", "max_descriptions", "template"}) {
            if (!side.contains(key) || side[key] != want[key])
                throw CacheInvalidError("cache '" + cache_path.string() + "' was built with " + key + "=" +
                                        (side.contains(key) ? side[key].dump() : std::string("<unset>")) +
                                        ", this run uses " + want[key].dump());
        }
    }

    auto fetch = [&](const std::string& id) {
        if (!cache.contains(id))
            throw CacheInvalidError("cache '" + cache_path.string() + "' has no entry '" + id + "'");
        return cache.lookup(id);
    };
    std::vector<Embedding> classes;
    for (const auto& c : catalog.classes()) classes.push_back(fetch(cache_class_id(c.label)));

    std::vector<ClassificationReport> reports;
    reports.reserve(manifest.records.size());
    for (const auto& rec : manifest.records) {
        const auto t0 = Clock::now();
        const Embedding k = fetch(cache_image_id(rec.id));
        ClassificationReport r;
        r.image_id = rec.id;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            r.labels.push_back(catalog[c].label);
            r.scores.push_back(dot(k, classes[c]));
        }
        r.predicted_index = argmax_first(r.scores);
        r.predicted_label = catalog[r.predicted_index].label;
        r.timing.score_seconds = seconds_since(t0);
        reports.push_back(std::move(r));
    }
    EvalReport out = aggregate(manifest, catalog, std::move(reports), desc);
    out.wall_seconds = seconds_since(wall0);
    return out;
}

nlohmann::ordered_json run_config_json(const RunDescription& desc) {
    nlohmann::ordered_json j;
    const RunConfig& run = desc.run;
    j["aggregation"] = to_string(run.aggregation);
    j["alpha"] = run.prompt.alpha;
    j["beta"] = run.prompt.beta;
    j["crops"] = run.prompt.num_crops;
    j["seed"] = run.prompt.seed;
    j["prompt_style"] = to_string(run.prompt.style);
    j["lambda"] = run.lambda ? nlohmann::ordered_json(*run.lambda) : nlohmann::ordered_json(nullptr);
    j["max_descriptions"] =
        desc.max_descriptions ? nlohmann::ordered_json(*desc.max_descriptions) : nlohmann::ordered_json(nullptr);
    j["template"] = desc.label_template;
    j["backend"] = desc.backend;
    return j;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["top1"] = report.top1;
    j["n"] = report.n;
    j["correct"] = report.correct;
    j["seed"] = report.description.run.prompt.seed;
    j["config"] = run_config_json(report.description);
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    std::vector<std::string> labels;
    for (const auto& c : report.per_class) {
        labels.push_back(c.label);
        nlohmann::ordered_json entry;
        entry["correct"] = c.correct;
        entry["total"] = c.total;
        entry["accuracy"] = c.total ? nlohmann::ordered_json(static_cast<double>(c.correct) / static_cast<double>(c.total))
                                    : nlohmann::ordered_json(nullptr);
        per_class[c.label] = entry;
    }
    j["per_class"] = per_class;
    j["confusion"] = {{"labels", labels}, {"counts", report.confusion}};
    nlohmann::ordered_json preds = nlohmann::ordered_json::array();
    for (const auto& p : report.predictions)
        preds.push_back({{"id", p.id}, {"label", p.label}, {"predicted", p.predicted}, {"scores", p.scores}});
    j["predictions"] = preds;
    return j;
}

nlohmann::ordered_json classification_json(const ClassificationReport& report) {
    nlohmann::ordered_json j;
    j["image_id"] = report.image_id;
    j["predicted_label"] = report.predicted_label;
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < report.labels.size(); ++k) scores[report.labels[k]] = report.scores[k];
    j["per_class_scores"] = scores;
    if (!report.explanation.empty()) {
        nlohmann::ordered_json ex = nlohmann::ordered_json::array();
        for (const auto& c : report.explanation) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& r : c.rows)
                rows.push_back({{"description", r.description}, {"weight", r.weight}, {"contribution", r.contribution}});
            ex.push_back({{"label", c.label}, {"score", c.score}, {"rows", rows}});
        }
        j["explanation"] = ex;
    }
    j["timing"] = {{"crop_preprocess_seconds", report.timing.crop_preprocess_seconds},
                   {"encode_seconds", report.timing.encode_seconds},
                   {"score_seconds", report.timing.score_seconds}};
    return j;
}

std::vector<BenchRow> bench_timing(const std::vector<std::pair<std::string, ImageBuffer>>& images,
                                   const LabelCatalog& catalog, const EncoderBackend& backend, const RunConfig& cfg,
                                   const std::vector<std::size_t>& crop_counts) {
    if (images.empty()) throw DomainError("bench needs at least one sample image");
    if (!backend.wants_pixels())
        throw ConfigError("bench times cropping and encoding, which needs a pixel backend (--model)");
    std::vector<std::size_t> counts{0};
    for (std::size_t n : crop_counts)
        if (n != 0) counts.push_back(n);

    std::vector<BenchRow> rows;
    for (std::size_t n : counts) {
        RunConfig run = cfg;
        run.explain = false;
        run.lambda.reset();
        run.aggregation = n == 0 ? Aggregation::Clip : Aggregation::Wca;
        if (n != 0) run.prompt.num_crops = n;
        const Classifier clf(catalog, backend, run);
        BenchRow row;
        row.crops = n;
        for (const auto& [id, img] : images) {
            const auto t0 = Clock::now();
            const ClassificationReport r = clf.classify(id, &img);
            row.total_s += seconds_since(t0);
            row.crop_preprocess_s += r.timing.crop_preprocess_seconds;
            row.encode_s += r.timing.encode_seconds;
            row.score_s += r.timing.score_seconds;
        }
        const auto count = static_cast<double>(images.size());
        row.crop_preprocess_s /= count;
        row.encode_s /= count;
        row.score_s /= count;
        row.total_s /= count;
        rows.push_back(row);
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "N,crop_preprocess_s,encode_s,score_s,total_s\n";
    out.precision(9);
    for (const auto& r : rows)
        out << r.crops << ',' << r.crop_preprocess_s << ',' << r.encode_s << ',' << r.score_s << ',' << r.total_s
            << '\n';
    return out.str();
}

}  // namespace wca
