#ifndef MASHSPUD_DATA_HPP
#define MASHSPUD_DATA_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/**
 * @file data.hpp
 *
 * @brief Dataset ingestion, 0-1 normalization, and seeded random sources.
 */

namespace mashspud {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * @brief Observations-by-features matrix with optional class labels.
 *
 * Labels are dense ids into `label_names`.
 */
struct DataMatrix {
    Matrix values;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> label_names;
    std::vector<std::string> feature_names;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    bool has_labels() const { return labels.has_value(); }

    bool operator==(const DataMatrix&) const = default;
};

/**
 * @brief Known correspondence: row `x` of the first domain is row `y` of the second.
 */
struct AnchorPair {
    Eigen::Index x;
    Eigen::Index y;

    auto operator<=>(const AnchorPair&) const = default;
};

using AnchorList = std::vector<AnchorPair>;

/**
 * @brief Two domains plus a partial one-to-one correspondence.
 */
struct DomainPair {
    DataMatrix x;
    DataMatrix y;
    AnchorList anchors;

    Eigen::Index n_x() const { return x.rows(); }
    Eigen::Index n_y() const { return y.rows(); }
    Eigen::Index size() const { return x.rows() + y.rows(); }
};

/**
 * Throws if anchors are out of range, reuse an index on either side,
 * or outnumber the smaller domain.
 */
inline void validate_anchors(const AnchorList& anchors, Eigen::Index n_x, Eigen::Index n_y) {
    if (static_cast<Eigen::Index>(anchors.size()) > std::min(n_x, n_y)) {
        throw std::invalid_argument("more anchors than points in the smaller domain");
    }
    std::set<Eigen::Index> seen_x, seen_y;
    for (const auto& a : anchors) {
        if (a.x < 0 || a.x >= n_x || a.y < 0 || a.y >= n_y) {
            throw std::invalid_argument("anchor index out of range");
        }
        if (!seen_x.insert(a.x).second || !seen_y.insert(a.y).second) {
            throw std::invalid_argument("anchor index used more than once");
        }
    }
}

inline void validate(const DomainPair& pair) {
    validate_anchors(pair.anchors, pair.n_x(), pair.n_y());
}

/**
 * @brief Seeded source of randomness; every stochastic step takes one of these.
 */
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_{seed}, engine_{seed} {}

    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& engine() { return engine_; }

    /// Independent stream derived from this seed and a tag.
    RandomSource fork(std::uint64_t tag) const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
        std::uint32_t words[2];
        seq.generate(words, words + 2);
        return RandomSource((static_cast<std::uint64_t>(words[1]) << 32) | words[0]);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return static_cast<std::size_t>(r % n);
    }

    double normal() { return normal_(engine_); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class NormalizeMode { per_column, whole_matrix };

/**
 * @brief Min-max scaling to [0, 1].
 *
 * `per_column` rescales each feature independently; `whole_matrix` uses the global
 * range (used for distance matrices). A zero range maps to zeros.
 */
inline Matrix normalize_01(const Matrix& values, NormalizeMode mode) {
    if (!values.allFinite()) {
        throw std::invalid_argument("normalize_01: non-finite input");
    }
    Matrix out(values.rows(), values.cols());
    if (values.size() == 0) {
        return out;
    }
    auto rescale = [](auto&& block, auto&& dst) {
        const double lo = block.minCoeff();
        const double range = block.maxCoeff() - lo;
        if (range > 0) {
            dst = (block.array() - lo) / range;
        } else {
            dst.setZero();
        }
    };
    if (mode == NormalizeMode::whole_matrix) {
        rescale(values, out);
    } else {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            auto dst = out.col(j);
            rescale(values.col(j), dst);
        }
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_cell(const std::string& raw, std::size_t line_no) {
    const std::string s = trim(raw);
    if (s.empty() || s == "NA" || s == "?") {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
    }
    if (used != s.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
    }
    return v;
}

inline std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/**
 * @brief Reads a headered CSV, drops rows with missing cells, and 0-1 normalizes features.
 *
 * Empty, `NA` and `?` cells count as missing; with `drop_missing == false` they are an
 * error instead. Label strings are mapped to ids in sorted order.
 */
inline DataMatrix load_csv(const std::string& path, const std::optional<std::string>& label_column = std::nullopt,
                           bool normalize = true, bool drop_missing = true) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": missing header row");
    }
    auto header = detail::split_csv_line(line);
    for (auto& h : header) {
        h = detail::trim(h);
    }
    std::optional<std::size_t> label_idx;
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw std::runtime_error(path + ": label column '" + *label_column + "' not in header");
        }
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    DataMatrix out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx) {
            out.feature_names.push_back(header[c]);
        }
    }
    const std::size_t p = out.feature_names.size();

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                     " fields, expected " + std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(p);
        bool missing = false;
        std::string label;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                label = detail::trim(cells[c]);
                missing = missing || label.empty() || label == "NA";
                continue;
            }
            auto v = detail::parse_cell(cells[c], line_no);
            if (!v) {
                missing = true;
            } else {
                row.push_back(*v);
            }
        }
        if (missing) {
            if (!drop_missing) {
                throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has a missing value");
            }
            continue;
        }
        rows.push_back(std::move(row));
        raw_labels.push_back(std::move(label));
    }
    if (rows.empty()) {
        throw std::runtime_error(path + ": no complete rows");
    }

    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    if (normalize) {
        out.values = normalize_01(out.values, NormalizeMode::per_column);
    }
    if (label_idx) {
        std::set<std::string> uniq(raw_labels.begin(), raw_labels.end());
        out.label_names.assign(uniq.begin(), uniq.end());
        std::map<std::string, int> ids;
        for (std::size_t i = 0; i < out.label_names.size(); ++i) {
            ids[out.label_names[i]] = static_cast<int>(i);
        }
        std::vector<int> labels;
        labels.reserve(raw_labels.size());
        for (const auto& l : raw_labels) {
            labels.push_back(ids[l]);
        }
        out.labels = std::move(labels);
    }
    return out;
}

/// Writes `data` so that `load_csv(path, "label")` reproduces it.
inline void write_csv(const DataMatrix& data, const std::string& path, const std::string& label_column = "label") {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const std::string name = j < static_cast<Eigen::Index>(data.feature_names.size()) ? data.feature_names[j]
                                                                                          : "f" + std::to_string(j);
        out << (j ? "," : "") << detail::quote_csv(name);
    }
    if (data.labels) {
        out << (data.cols() ? "," : "") << detail::quote_csv(label_column);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            out << (j ? "," : "") << data.values(i, j);
        }
        if (data.labels) {
            const int id = (*data.labels)[static_cast<std::size_t>(i)];
            out << (data.cols() ? "," : "") << detail::quote_csv(data.label_names.at(static_cast<std::size_t>(id)));
        }
        out << '\n';
    }
}

/// Rows `idx` of `data`, keeping labels and names.
inline DataMatrix select_rows(const DataMatrix& data, const std::vector<Eigen::Index>& idx) {
    DataMatrix out;
    out.values.resize(static_cast<Eigen::Index>(idx.size()), data.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.values.row(static_cast<Eigen::Index>(r)) = data.values.row(idx[r]);
    }
    if (data.labels) {
        std::vector<int> labels;
        labels.reserve(idx.size());
        for (auto i : idx) {
            labels.push_back((*data.labels)[static_cast<std::size_t>(i)]);
        }
        out.labels = std::move(labels);
    }
    out.label_names = data.label_names;
    out.feature_names = data.feature_names;
    return out;
}

/// Columns `idx` of `data`, keeping labels and names.
inline DataMatrix select_columns(const DataMatrix& data, const std::vector<Eigen::Index>& idx) {
    DataMatrix out;
    out.values.resize(data.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        out.values.col(static_cast<Eigen::Index>(c)) = data.values.col(idx[c]);
        if (idx[c] < static_cast<Eigen::Index>(data.feature_names.size())) {
            out.feature_names.push_back(data.feature_names[static_cast<std::size_t>(idx[c])]);
        }
    }
    out.labels = data.labels;
    out.label_names = data.label_names;
    return out;
}

/// Anchor pairs from a two-column CSV of (x index, y index); a header row is optional.
inline AnchorList load_anchor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    AnchorList anchors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (cells.size() != 2) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " must have two fields");
        }
        try {
            anchors.push_back({std::stol(cells[0]), std::stol(cells[1])});
        } catch (const std::exception&) {
            if (line_no == 1) {
                continue;
            }
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " is not an index pair");
        }
    }
    return anchors;
}

} // namespace mashspud

#endif
