#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "certirad/radius_cta.hpp"
#include "certirad/smoothing.hpp"

// File formats shared with externally computed classifier outputs.
namespace certirad::io {

// Malformed input; carries the 1-based line number when known.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct CountsRecord {
    std::string input_id;
    int label = 0;
    smooth::CountsVector counts;
};

struct MatrixRecord {
    std::string input_id;
    int label = 0;
    smooth::ProbabilityMatrix matrix;
};

// CSV with header input_id,label,c_0,...,c_{m-1}
std::vector<CountsRecord> read_counts_csv(const std::string& path);
void write_counts_csv(const std::string& path, const std::vector<CountsRecord>& records);

// JSON lines, one {"input_id":..., "label":..., "rows":[[...]]} per input.
std::vector<MatrixRecord> read_matrix_jsonl(const std::string& path);
void write_matrix_jsonl(const std::string& path, const std::vector<MatrixRecord>& records);

// CSV with header r,approx_acc,lcb_acc
void write_cta_csv(const std::string& path, const cta::CtaCurve& curve);
cta::CtaCurve read_cta_csv(const std::string& path);

}  // namespace certirad::io
