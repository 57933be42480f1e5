#include "moodtag/labels.hpp"

#include <cctype>

namespace moodtag {

namespace {
constexpr std::array<std::string_view, kLabelCount> kNames = {"happy", "sad",  "relaxing",
                                                              "exciting", "epic", "thriller"};
}

std::string_view label_name(Label label) { return kNames[label_index(label)]; }

std::optional<Label> parse_label(std::string_view text) {
    std::string lower;
    for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == lower) return kAllLabels[i];
    }
    return std::nullopt;
}

std::string label_title(Label label) {
    std::string s(label_name(label));
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

}  // namespace moodtag
