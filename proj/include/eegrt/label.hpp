#pragma once

#include <cstdint>
#include <string>

#include "eegrt/error.hpp"

namespace eegrt {

// Binary decision alphabet used across the whole pipeline.
enum class Label : std::uint8_t { bckg = 0, seiz = 1 };

inline const char* label_name(Label l) { return l == Label::seiz ? "seiz" : "bckg"; }

inline Label parse_label(const std::string& s) {
    if (s == "seiz") return Label::seiz;
    if (s == "bckg") return Label::bckg;
    fail_data("unknown label '" + s + "' (expected 'bckg' or 'seiz')");
}

}  // namespace eegrt
