#include "fluorsim/spectrum_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace fluorsim {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_field(const std::filesystem::path& path, std::size_t line,
                   std::string_view field) {
    double v = 0.0;
    const char* b = field.data();
    const char* e = b + field.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        fail(path, line, "malformed number '" + std::string(field) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

Spectrum read_spectrum_csv(const std::filesystem::path& path, SpectrumKind kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spectrum file " + path.string());

    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(path, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "wavelength_nm,value")
        fail(path, 1, "expected header 'wavelength_nm,value'");

    std::vector<double> wl, vals;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(path, lineno, "expected two comma-separated fields");
        const double w = parse_field(path, lineno, std::string_view(line).substr(0, comma));
        const double v = parse_field(path, lineno, std::string_view(line).substr(comma + 1));
        if (!wl.empty() && w <= wl.back()) fail(path, lineno, "wavelengths must be ascending");
        if (!(v >= 0.0)) fail(path, lineno, "negative value");
        wl.push_back(w);
        vals.push_back(v);
    }
    if (wl.size() < 2) fail(path, lineno, "need at least two samples");

    const double step = (wl.back() - wl.front()) / static_cast<double>(wl.size() - 1);
    for (std::size_t k = 0; k < wl.size(); ++k)
        if (std::abs(wl[k] - (wl.front() + step * static_cast<double>(k))) > 1e-6)
            fail(path, k + 2, "wavelength grid is not uniform");

    Spectrum s;
    s.kind = kind;
    s.grid = {wl.front(), step, wl.size()};
    s.values = std::move(vals);
    return s;
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    validate_spectrum(s);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write spectrum file " + path.string());
    out << "wavelength_nm,value\n";
    for (std::size_t k = 0; k < s.grid.count; ++k)
        out << format_double(s.grid.wavelength(k)) << ',' << format_double(s.values[k]) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace fluorsim
