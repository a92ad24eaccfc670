#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jelk/data.hpp"
#include "jelk/errors.hpp"

namespace jelk {

struct DatasetOptions {
    // Label column by header name or 0-based index; empty means last column.
    std::string label_col;
    // Feature columns by name or 0-based index; empty means all non-label.
    std::vector<std::string> cols;
};

struct LoadedDataset {
    std::vector<std::string> feature_names;
    std::string label_name;
    std::vector<Sample> samples;  // one per label, first-appearance order
    int n_rows = 0;
    bool had_header = false;
};

// Comma- or tab-delimited text, one observation per row. A header row is
// detected by comparing the first two rows: a column that is numeric in row
// two but not in row one marks row one as a header. Messages carry 1-based
// physical row numbers.
LoadedDataset parse_dataset(std::istream& in, const DatasetOptions& opt,
                            const std::string& display_name);
LoadedDataset load_dataset(const std::string& path, const DatasetOptions& opt = {});

// Writes header + rows, features first, label last, with round-trip double
// precision.
void write_dataset_csv(const LoadedDataset& ds, std::ostream& out);

}  // namespace jelk
