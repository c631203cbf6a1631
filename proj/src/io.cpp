#include "semi/io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "semi/errors.hpp"

namespace semi {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& A, const char* kind,
                              bool hermitian_hint) {
    nlohmann::json j;
    j["kind"] = kind;
    j["rows"] = A.rows();
    j["cols"] = A.cols();
    j["hermitian"] = hermitian_hint;
    std::vector<double> entries;
    entries.reserve(2 * A.size());
    for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) {
            entries.push_back(A(r, c).real());
            entries.push_back(A(r, c).imag());
        }
    j["entries"] = std::move(entries);
    return j;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& entries = j.at("entries");
    if (static_cast<Eigen::Index>(entries.size()) != 2 * rows * cols)
        throw ConfigError("operator dump: entry count mismatch");
    Eigen::MatrixXcd A(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            A(r, c) = Complex(entries[k].get<double>(), entries[k + 1].get<double>());
            k += 2;
        }
    return A;
}

void write_binary(const Eigen::MatrixXcd& A, const std::string& path,
                  const char magic[9]) {
    std::string blob;
    blob.reserve(8 + 16 + 16 * A.size());
    blob.append(magic, 8);
    auto put64 = [&blob](std::int64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
        blob.append(reinterpret_cast<char*>(b), 8);
    };
    auto put_double = [&blob](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (bits >> (8 * i)) & 0xff;
        blob.append(reinterpret_cast<char*>(b), 8);
    };
    put64(A.rows());
    put64(A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (Eigen::Index c = 0; c < A.cols(); ++c) {
            put_double(A(r, c).real());
            put_double(A(r, c).imag());
        }
    write_text_atomic(path, blob);
}

Eigen::MatrixXcd read_binary(const std::string& path, const char magic[9]) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (blob.size() < 24 || blob.compare(0, 8, magic, 8) != 0)
        throw ConfigError("bad dump header in " + path);
    auto get64 = [&blob](size_t off) {
        std::int64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = (v << 8) | static_cast<unsigned char>(blob[off + i]);
        return v;
    };
    const Eigen::Index rows = get64(8), cols = get64(16);
    if (blob.size() != 24 + static_cast<size_t>(16 * rows * cols))
        throw ConfigError("bad dump size in " + path);
    Eigen::MatrixXcd A(rows, cols);
    size_t off = 24;
    auto get_double = [&blob](size_t o) {
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i)
            bits = (bits << 8) | static_cast<unsigned char>(blob[o + i]);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    };
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            A(r, c) = Complex(get_double(off), get_double(off + 8));
            off += 16;
        }
    return A;
}

} // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

void dump_operator_json(const Eigen::MatrixXcd& A, const std::string& path,
                        bool hermitian_hint) {
    write_text_atomic(path, matrix_to_json(A, "operator", hermitian_hint).dump(2));
}

Eigen::MatrixXcd load_operator_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return matrix_from_json(j);
}

void dump_operator_binary(const Eigen::MatrixXcd& A, const std::string& path) {
    write_binary(A, path, "SEMIOP01");
}

Eigen::MatrixXcd load_operator_binary(const std::string& path) {
    return read_binary(path, "SEMIOP01");
}

void dump_vector_json(const Eigen::VectorXcd& v, const std::string& path) {
    write_text_atomic(path, matrix_to_json(v, "vector", false).dump(2));
}

Eigen::VectorXcd load_vector_json(const std::string& path) {
    const Eigen::MatrixXcd A = load_operator_json(path);
    if (A.cols() != 1) throw ConfigError("vector dump has more than one column");
    return A.col(0);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw ArgumentError("CsvTable: empty header");
}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != header_.size())
        throw ArgumentError("CsvTable: row width mismatch");
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) row.push_back(format_g17(v));
    rows_.push_back(std::move(row));
}

void CsvTable::add_row_mixed(const std::vector<std::string>& values) {
    if (values.size() != header_.size())
        throw ArgumentError("CsvTable: row width mismatch");
    rows_.push_back(values);
}

std::string CsvTable::render() const {
    std::string out;
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::string& path) const {
    write_text_atomic(path, render());
}

std::string config_hash(const nlohmann::json& config) {
    return hex64(fnv1a(config.dump()));
}

void write_field_csv(const std::string& path, const Eigen::MatrixXcd& nodes,
                     const Eigen::VectorXd& values) {
    if (nodes.rows() != values.size())
        throw ArgumentError("write_field_csv: node/value count mismatch");
    std::vector<std::string> header;
    for (Eigen::Index m = 0; m < nodes.cols(); ++m) {
        header.push_back("z" + std::to_string(m) + "_re");
        header.push_back("z" + std::to_string(m) + "_im");
    }
    header.push_back("f");
    CsvTable table(header);
    std::vector<double> row(header.size());
    for (Eigen::Index k = 0; k < nodes.rows(); ++k) {
        for (Eigen::Index m = 0; m < nodes.cols(); ++m) {
            row[2 * m] = nodes(k, m).real();
            row[2 * m + 1] = nodes(k, m).imag();
        }
        row.back() = values(k);
        table.add_row(row);
    }
    table.write(path);
}

} // namespace semi
