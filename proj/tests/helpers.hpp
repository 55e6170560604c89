#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "canlift/decomposer.hpp"

namespace testutil {

inline std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "canlift_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_temp(const std::string& name, const std::string& text) {
    auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path.string();
}

// Candidate series fixture with uniform timestamps.
inline canlift::CandidateSeries make_series(std::vector<uint32_t> raw, double dt = 0.01,
                                            canlift::SeriesId id = {0x100, {0, 1}}) {
    canlift::CandidateSeries s;
    s.id = id;
    for (size_t i = 0; i < raw.size(); ++i) s.ts.push_back(static_cast<double>(i) * dt);
    s.raw = std::move(raw);
    std::vector<uint32_t> d = s.raw;
    std::sort(d.begin(), d.end());
    s.distinct = static_cast<size_t>(std::unique(d.begin(), d.end()) - d.begin());
    return s;
}

inline canlift::CandidateSeries make_normalized(std::vector<uint32_t> raw, double dt = 0.01,
                                                canlift::SeriesId id = {0x100, {0, 1}}) {
    return canlift::normalize(make_series(std::move(raw), dt, id));
}

} // namespace testutil
