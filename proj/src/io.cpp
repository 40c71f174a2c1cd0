#include "certirad/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace certirad::io {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

[[noreturn]] void fail_line(const std::string& path, long lineno, const std::string& msg) {
    throw DataError(path + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

std::vector<CountsRecord> read_counts_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++lineno;
    const auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "input_id" || header[1] != "label")
        fail_line(path, lineno, "expected header input_id,label,c_0,...");
    const int m = static_cast<int>(header.size()) - 2;

    std::vector<CountsRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != m + 2)
            fail_line(path, lineno, "wrong field count");
        CountsRecord rec;
        rec.input_id = fields[0];
        try {
            rec.label = std::stoi(fields[1]);
            for (int j = 0; j < m; ++j) {
                const long c = std::stol(fields[2 + j]);
                if (c < 0) fail_line(path, lineno, "negative count");
                rec.counts.counts.push_back(c);
                rec.counts.total += c;
            }
        } catch (const std::invalid_argument&) {
            fail_line(path, lineno, "non-numeric field");
        }
        if (rec.counts.total < 1) fail_line(path, lineno, "zero total count");
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw DataError(path + ": no input rows");
    return out;
}

void write_counts_csv(const std::string& path, const std::vector<CountsRecord>& records) {
    std::ofstream out = open_out(path);
    const int m = records.empty() ? 0 : static_cast<int>(records.front().counts.counts.size());
    out << "input_id,label";
    for (int j = 0; j < m; ++j) out << ",c_" << j;
    out << "\n";
    for (const auto& rec : records) {
        out << rec.input_id << "," << rec.label;
        for (long c : rec.counts.counts) out << "," << c;
        out << "\n";
    }
}

std::vector<MatrixRecord> read_matrix_jsonl(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long lineno = 0;
    std::vector<MatrixRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_line(path, lineno, e.what());
        }
        if (!j.contains("input_id") || !j.contains("label") || !j.contains("rows"))
            fail_line(path, lineno, "missing input_id/label/rows");
        MatrixRecord rec;
        rec.input_id = j["input_id"].is_string() ? j["input_id"].get<std::string>()
                                                 : std::to_string(j["input_id"].get<long>());
        rec.label = j["label"].get<int>();
        const auto& rows = j["rows"];
        if (!rows.is_array() || rows.empty()) fail_line(path, lineno, "rows must be nonempty");
        rec.matrix.n = static_cast<long>(rows.size());
        rec.matrix.m = static_cast<int>(rows.front().size());
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != rec.matrix.m)
                fail_line(path, lineno, "ragged rows");
            double sum = 0.0;
            for (const auto& v : row) {
                const double x = v.get<double>();
                if (x < -1e-9) fail_line(path, lineno, "negative probability");
                rec.matrix.data.push_back(x);
                sum += x;
            }
            if (std::abs(sum - 1.0) > 1e-6) fail_line(path, lineno, "row does not sum to 1");
        }
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw DataError(path + ": no input rows");
    return out;
}

void write_matrix_jsonl(const std::string& path, const std::vector<MatrixRecord>& records) {
    std::ofstream out = open_out(path);
    for (const auto& rec : records) {
        json rows = json::array();
        for (long i = 0; i < rec.matrix.n; ++i) {
            json row = json::array();
            for (double v : rec.matrix.row(i)) row.push_back(v);
            rows.push_back(std::move(row));
        }
        out << json{{"input_id", rec.input_id}, {"label", rec.label}, {"rows", std::move(rows)}}
                   .dump()
            << "\n";
    }
}

void write_cta_csv(const std::string& path, const cta::CtaCurve& curve) {
    std::ofstream out = open_out(path);
    out << "r,approx_acc,lcb_acc\n";
    out.precision(10);
    for (size_t i = 0; i < curve.grid.size(); ++i)
        out << curve.grid[i] << "," << curve.approx_acc[i] << "," << curve.lcb_acc[i] << "\n";
}

cta::CtaCurve read_cta_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++lineno;
    if (line != "r,approx_acc,lcb_acc") fail_line(path, lineno, "bad CTA header");
    cta::CtaCurve curve;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) fail_line(path, lineno, "wrong field count");
        try {
            curve.grid.push_back(std::stod(f[0]));
            curve.approx_acc.push_back(std::stod(f[1]));
            curve.lcb_acc.push_back(std::stod(f[2]));
        } catch (const std::invalid_argument&) {
            fail_line(path, lineno, "non-numeric field");
        }
    }
    return curve;
}

}  // namespace certirad::io
