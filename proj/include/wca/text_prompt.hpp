// Copyright (C) 2026 The WCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wca {

inline constexpr std::string_view kDefaultTemplate = "a photo of a {}";
inline constexpr std::size_t kDefaultMaxDescriptions = 50;

/// Prompt templates averaged by the CLIP-E baseline on pixel backends.
inline constexpr std::string_view kEnsembleTemplates[] = {
    "a photo of a {}.",         "a bad photo of a {}.",     "a photo of many {}.",
    "a sculpture of a {}.",     "a rendering of a {}.",     "a drawing of a {}.",
    "a photo of the large {}.", "a photo of the small {}.",
};

struct DescriptionSet {
    std::string label;
    std::vector<std::string> descriptions;
};

class LabelCatalog {
public:
    LabelCatalog(std::vector<DescriptionSet> classes, std::string label_template = std::string(kDefaultTemplate));

    std::size_t size() const noexcept { return classes_.size(); }
    const std::vector<DescriptionSet>& classes() const noexcept { return classes_; }
    const DescriptionSet& operator[](std::size_t k) const { return classes_[k]; }
    const std::string& label_template() const noexcept { return template_; }

    /// Index of a label, or nullopt.
    std::optional<std::size_t> find(std::string_view label) const;

    /// Templated prompt used as the description-weight anchor.
    std::string prompt_for(std::size_t k) const;

    /// JSON object label -> descriptions, in catalog order.
    std::string to_json() const;

private:
    std::vector<DescriptionSet> classes_;
    std::string template_;
};

/// Parses a JSON object mapping class name -> array of description strings.
/// Insertion order is kept; each class keeps its first `max_descriptions`
/// entries when set. Throws IngestionError naming the offending class.
LabelCatalog parse_descriptions(std::string_view json_text, std::optional<std::size_t> max_descriptions = {},
                                std::string label_template = std::string(kDefaultTemplate));
LabelCatalog load_descriptions(const std::filesystem::path& path,
                               std::optional<std::size_t> max_descriptions = {},
                               std::string label_template = std::string(kDefaultTemplate));

/// Substitutes the single "{}" placeholder. ConfigError when the template has
/// zero or several placeholders.
std::string label_prompt(std::string_view label, std::string_view label_template);

}  // namespace wca
