// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "wca/text_prompt.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "wca/error.hpp"

namespace wca {

namespace {

std::size_t count_placeholders(std::string_view t) {
    std::size_t n = 0;
    for (std::size_t pos = t.find("{}"); pos != std::string_view::npos; pos = t.find("{}", pos + 2)) ++n;
    return n;
}

}  // namespace

std::string label_prompt(std::string_view label, std::string_view label_template) {
    const std::size_t n = count_placeholders(label_template);
    if (n != 1)
        throw ConfigError("label template '" + std::string(label_template) + "' must contain exactly one {} (found " +
                          std::to_string(n) + ")");
    const std::size_t pos = label_template.find("{}");
    std::string out(label_template.substr(0, pos));
    out += label;
    out += label_template.substr(pos + 2);
    return out;
}

LabelCatalog::LabelCatalog(std::vector<DescriptionSet> classes, std::string label_template)
    : classes_(std::move(classes)), template_(std::move(label_template)) {
    if (classes_.empty()) throw IngestionError("label catalog has no classes");
    label_prompt("x", template_);  // validates the template
    std::set<std::string_view> seen;
    for (const auto& c : classes_) {
        if (c.label.empty()) throw IngestionError("class with an empty label");
        if (!seen.insert(c.label).second) throw IngestionError("duplicate class '" + c.label + "'");
        if (c.descriptions.empty()) throw IngestionError("class '" + c.label + "' has no descriptions");
        for (const auto& d : c.descriptions)
            if (d.empty()) throw IngestionError("class '" + c.label + "' has an empty description");
    }
}

std::optional<std::size_t> LabelCatalog::find(std::string_view label) const {
    for (std::size_t k = 0; k < classes_.size(); ++k)
        if (classes_[k].label == label) return k;
    return std::nullopt;
}

std::string LabelCatalog::prompt_for(std::size_t k) const { return label_prompt(classes_.at(k).label, template_); }

std::string LabelCatalog::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& c : classes_) j[c.label] = c.descriptions;
    return j.dump();
}

LabelCatalog parse_descriptions(std::string_view json_text, std::optional<std::size_t> max_descriptions,
                                std::string label_template) {
    if (max_descriptions && *max_descriptions == 0) throw ConfigError("max descriptions must be >= 1");
    // Reject duplicate class names, which the JSON parser would silently merge.
    std::set<std::string> top_keys;
    std::string duplicate;
    auto on_event = [&](int depth, nlohmann::ordered_json::parse_event_t ev, nlohmann::ordered_json& parsed) {
        if (ev == nlohmann::ordered_json::parse_event_t::key && depth == 1) {
            const auto key = parsed.get<std::string>();
            if (!top_keys.insert(key).second && duplicate.empty()) duplicate = key;
        }
        return true;
    };
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(json_text.begin(), json_text.end(), on_event);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError(std::string("malformed description JSON: ") + e.what());
    }
    if (!duplicate.empty()) throw IngestionError("duplicate class '" + duplicate + "'");
    if (!doc.is_object()) throw IngestionError("description file must be a JSON object of class -> [descriptions]");
    if (doc.empty()) throw IngestionError("description file lists no classes");

    std::vector<DescriptionSet> classes;
    for (const auto& [label, arr] : doc.items()) {
        if (!arr.is_array()) throw IngestionError("class '" + label + "': descriptions must be an array");
        if (arr.empty()) throw IngestionError("class '" + label + "' has no descriptions");
        DescriptionSet set{label, {}};
        for (const auto& d : arr) {
            if (!d.is_string()) throw IngestionError("class '" + label + "': description is not a string");
            if (max_descriptions && set.descriptions.size() == *max_descriptions) break;
            set.descriptions.push_back(d.get<std::string>());
        }
        classes.push_back(std::move(set));
    }
    return LabelCatalog(std::move(classes), std::move(label_template));
}

LabelCatalog load_descriptions(const std::filesystem::path& path, std::optional<std::size_t> max_descriptions,
                               std::string label_template) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open description file '" + path.string() + "'");
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
        return parse_descriptions(text, max_descriptions, std::move(label_template));
    } catch (const IngestionError& e) {
        throw IngestionError(path.string() + ": " + e.what());
    }
}

}  // namespace wca
