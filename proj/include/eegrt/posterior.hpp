#pragma once

#include <filesystem>
#include <vector>

namespace eegrt {

struct PosteriorEntry {
    double start_sec = 0.0;
    double p_seiz = 0.0;
};

// Per-window seizure probabilities at a uniform stride, ordered by start time.
struct PosteriorSequence {
    std::vector<PosteriorEntry> entries;
    double stride_sec = 1.0;

    void validate() const;  // uniform stride at 1 ms resolution, p in [0,1]

    static PosteriorSequence load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

}  // namespace eegrt
