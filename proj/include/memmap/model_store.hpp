#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "memmap/learner.hpp"

namespace memmap {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

/// 17 significant digits round-trips any double exactly.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_matrix_row_major(std::ostream& os, const Matrix& m) {
    os << '[';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != 0 || j != 0) os << ',';
            os << fmt_double(m(i, j));
        }
    }
    os << ']';
}

inline void write_vector(std::ostream& os, const Vector& v) {
    os << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i != 0) os << ',';
        os << fmt_double(v[i]);
    }
    os << ']';
}

inline Matrix read_matrix_row_major(const nlohmann::json& j, const char* key,
                                    Eigen::Index rows, Eigen::Index cols) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw ParseError(std::string("model file: missing or non-array key \"") +
                         key + "\"");
    }
    const auto& arr = j[key];
    if (static_cast<Eigen::Index>(arr.size()) != rows * cols) {
        throw ParseError(std::string("model file: key \"") + key + "\" has " +
                         std::to_string(arr.size()) + " entries, expected " +
                         std::to_string(rows * cols));
    }
    Matrix m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
            if (!arr[idx].is_number()) {
                throw ParseError(std::string("model file: non-numeric entry in \"") +
                                 key + "\"");
            }
            m(i, j2) = arr[idx].get<double>();
            ++idx;
        }
    }
    return m;
}

template <typename T>
T read_scalar(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParseError(std::string("model file: missing or non-numeric key \"") +
                         key + "\"");
    }
    return j[key].get<T>();
}

} // namespace detail

/// Writes the versioned model document. Canonical key order and fixed
/// float formatting make save -> load -> save byte-identical.
inline void save_model(const ModelParams& model, const std::string& path,
                       bool include_b = false) {
    model.validate();
    std::ostringstream os;
    os << "{\n";
    os << "\"format_version\": " << kModelFormatVersion << ",\n";
    os << "\"n\": " << model.n << ",\n";
    os << "\"p\": " << model.p << ",\n";
    os << "\"M\": " << model.M << ",\n";
    os << "\"N\": " << model.N << ",\n";
    os << "\"nu\": " << detail::fmt_double(model.nu) << ",\n";
    os << "\"sigma2\": " << detail::fmt_double(model.sigma2) << ",\n";
    os << "\"sigma_x2\": " << detail::fmt_double(model.sigma_x2) << ",\n";
    os << "\"w\": ";
    detail::write_vector(os, model.w);
    os << ",\n\"a\": ";
    detail::write_matrix_row_major(os, model.a);
    os << ",\n\"alpha\": ";
    detail::write_matrix_row_major(os, model.alpha);
    if (include_b) {
        if (model.B.size() == 0) {
            throw std::invalid_argument("save_model: model carries no B matrix");
        }
        os << ",\n\"B\": ";
        detail::write_matrix_row_major(os, model.B);
    }
    os << "\n}\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << os.str();
    if (!out) throw IoError("write failed: " + path);
}

inline ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
    const int version = detail::read_scalar<int>(j, "format_version");
    if (version != kModelFormatVersion) {
        throw ParseError("model file " + path + ": unsupported format_version " +
                         std::to_string(version));
    }
    ModelParams m;
    m.n = detail::read_scalar<Eigen::Index>(j, "n");
    m.p = detail::read_scalar<Eigen::Index>(j, "p");
    m.M = detail::read_scalar<Eigen::Index>(j, "M");
    m.N = detail::read_scalar<Eigen::Index>(j, "N");
    m.nu = detail::read_scalar<double>(j, "nu");
    m.sigma2 = detail::read_scalar<double>(j, "sigma2");
    m.sigma_x2 = detail::read_scalar<double>(j, "sigma_x2");
    m.w = detail::read_matrix_row_major(j, "w", m.n, 1).col(0);
    m.a = detail::read_matrix_row_major(j, "a", m.M, m.n);
    m.alpha = detail::read_matrix_row_major(j, "alpha", m.M, m.p);
    if (j.contains("B")) {
        m.B = detail::read_matrix_row_major(j, "B", m.M, m.N);
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
    return m;
}

/// FitReport as JSON next to the model file.
inline void save_report(const FitReport& report, const std::string& path) {
    std::ostringstream os;
    os << "{\n";
    os << "\"converged\": " << (report.converged ? "true" : "false") << ",\n";
    os << "\"iterations\": " << report.iterations << ",\n";
    os << "\"clamp_activations\": " << report.clamp_activations << ",\n";
    os << "\"note\": \"" << report.note << "\",\n";
    os << "\"beta_trace\": [";
    for (std::size_t i = 0; i < report.beta_trace.size(); ++i) {
        if (i != 0) os << ',';
        os << detail::fmt_double(report.beta_trace[i]);
    }
    os << "]\n}\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << os.str();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace memmap
