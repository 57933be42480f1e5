#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace moodtag {

enum class Label { Happy, Sad, Relaxing, Exciting, Epic, Thriller };

inline constexpr std::size_t kLabelCount = 6;

inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::Happy, Label::Sad, Label::Relaxing, Label::Exciting, Label::Epic, Label::Thriller};

std::string_view label_name(Label label);

// Lower-case name as used in manifests and CSV files.
std::optional<Label> parse_label(std::string_view text);

// Capitalized form used in human-readable tables ("Happy").
std::string label_title(Label label);

inline std::size_t label_index(Label label) { return static_cast<std::size_t>(label); }

}  // namespace moodtag
