#include "jelk/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace jelk {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_number(const std::string& s, double* out) {
    if (s.empty())
        return false;
    char* end = nullptr;
    double x = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        return false;
    *out = x;
    return true;
}

// Resolve a column reference (header name or 0-based index) to an index.
int resolve_column(const std::string& ref, const std::vector<std::string>& names,
                   const std::string& what) {
    for (size_t j = 0; j < names.size(); ++j)
        if (names[j] == ref)
            return static_cast<int>(j);
    char* end = nullptr;
    long idx = std::strtol(ref.c_str(), &end, 10);
    if (!ref.empty() && end == ref.c_str() + ref.size()) {
        if (idx < 0 || idx >= static_cast<long>(names.size()))
            throw ValidationError(what + " column index " + ref + " out of range (0.." +
                                  std::to_string(names.size() - 1) + ")");
        return static_cast<int>(idx);
    }
    std::string known;
    for (const auto& n : names)
        known += (known.empty() ? "" : ", ") + n;
    throw ValidationError(what + " column '" + ref + "' not found (columns: " + known +
                          ")");
}

}  // namespace

LoadedDataset parse_dataset(std::istream& in, const DatasetOptions& opt,
                            const std::string& display_name) {
    std::vector<std::pair<int, std::string>> lines;  // (physical row number, text)
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        if (!trim(raw).empty())
            lines.emplace_back(lineno, raw);
    }
    if (lines.empty())
        throw ValidationError(display_name + ": no data rows");

    const char delim = lines[0].second.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> first = split(lines[0].second, delim);
    const int ncols = static_cast<int>(first.size());
    if (ncols < 2)
        throw ValidationError(display_name + ": need at least 2 columns");

    bool header = false;
    if (lines.size() >= 2) {
        std::vector<std::string> second = split(lines[1].second, delim);
        double x;
        for (int j = 0; j < ncols && j < static_cast<int>(second.size()); ++j)
            if (!parse_number(first[j], &x) && parse_number(second[j], &x))
                header = true;
    }

    LoadedDataset ds;
    ds.had_header = header;
    std::vector<std::string> names;
    if (header) {
        names = first;
    } else {
        for (int j = 0; j < ncols; ++j)
            names.push_back("c" + std::to_string(j + 1));
    }

    const int label_idx = opt.label_col.empty()
                              ? ncols - 1
                              : resolve_column(opt.label_col, names, "label");
    std::vector<int> feature_idx;
    if (opt.cols.empty()) {
        for (int j = 0; j < ncols; ++j)
            if (j != label_idx)
                feature_idx.push_back(j);
    } else {
        for (const auto& ref : opt.cols) {
            int j = resolve_column(ref, names, "feature");
            if (j == label_idx)
                throw ValidationError("feature column '" + ref +
                                      "' is the label column");
            if (std::find(feature_idx.begin(), feature_idx.end(), j) !=
                feature_idx.end())
                throw ValidationError("feature column '" + ref + "' listed twice");
            feature_idx.push_back(j);
        }
    }
    if (feature_idx.empty())
        throw ValidationError(display_name + ": no feature columns selected");

    ds.label_name = names[label_idx];
    for (int j : feature_idx)
        ds.feature_names.push_back(names[j]);

    // Group rows by label value in first-appearance order.
    std::map<std::string, int> group_index;
    std::vector<std::string> group_labels;
    std::vector<std::vector<std::vector<double>>> group_rows;

    for (size_t li = header ? 1 : 0; li < lines.size(); ++li) {
        const int row_no = lines[li].first;
        std::vector<std::string> fields = split(lines[li].second, delim);
        if (static_cast<int>(fields.size()) != ncols)
            throw ValidationError(display_name + " row " + std::to_string(row_no) +
                                  ": expected " + std::to_string(ncols) +
                                  " fields, got " + std::to_string(fields.size()));
        std::vector<double> coords(feature_idx.size());
        for (size_t f = 0; f < feature_idx.size(); ++f) {
            const std::string& cell = fields[feature_idx[f]];
            double x;
            if (cell.empty())
                throw ValidationError(display_name + " row " + std::to_string(row_no) +
                                      ": missing value in column '" +
                                      names[feature_idx[f]] + "'");
            if (!parse_number(cell, &x) || !std::isfinite(x))
                throw ValidationError(display_name + " row " + std::to_string(row_no) +
                                      ": non-numeric value '" + cell +
                                      "' in column '" + names[feature_idx[f]] + "'");
            coords[f] = x;
        }
        const std::string& label = fields[label_idx];
        if (label.empty())
            throw ValidationError(display_name + " row " + std::to_string(row_no) +
                                  ": missing label");
        auto it = group_index.find(label);
        if (it == group_index.end()) {
            it = group_index.emplace(label, static_cast<int>(group_labels.size()))
                     .first;
            group_labels.push_back(label);
            group_rows.emplace_back();
        }
        group_rows[it->second].push_back(std::move(coords));
        ++ds.n_rows;
    }

    if (group_labels.size() < 2)
        throw ValidationError(display_name + ": label column '" + ds.label_name +
                              "' has fewer than 2 distinct values");

    const int d = static_cast<int>(feature_idx.size());
    for (size_t g = 0; g < group_labels.size(); ++g) {
        Sample s;
        s.label = group_labels[g];
        s.points.resize(static_cast<int>(group_rows[g].size()), d);
        for (size_t r = 0; r < group_rows[g].size(); ++r)
            for (int j = 0; j < d; ++j)
                s.points(static_cast<int>(r), j) = group_rows[g][r][j];
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

LoadedDataset load_dataset(const std::string& path, const DatasetOptions& opt) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open dataset file: " + path);
    return parse_dataset(in, opt, path);
}

void write_dataset_csv(const LoadedDataset& ds, std::ostream& out) {
    for (const auto& name : ds.feature_names)
        out << name << ',';
    out << (ds.label_name.empty() ? "label" : ds.label_name) << '\n';
    char buf[40];
    for (const auto& s : ds.samples) {
        for (int r = 0; r < s.points.rows(); ++r) {
            for (int j = 0; j < s.points.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", s.points(r, j));
                out << buf << ',';
            }
            out << s.label << '\n';
        }
    }
}

}  // namespace jelk
