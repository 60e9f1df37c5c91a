#include "bci/ledger_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "bci/errors.hpp"

namespace bci {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_cell(const std::string& raw, std::size_t line, std::size_t field) {
    // Accept surrounding whitespace, nothing else.
    std::size_t a = raw.find_first_not_of(" \t");
    std::size_t b = raw.find_last_not_of(" \t");
    if (a == std::string::npos) {
        throw ParseError("dense-csv line " + std::to_string(line) + ", field " +
                             std::to_string(field) + ": empty cell",
                         line, field);
    }
    const std::string cell = raw.substr(a, b - a + 1);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw ParseError("dense-csv line " + std::to_string(line) + ", field " +
                             std::to_string(field) + ": not a finite number: '" + cell + "'",
                         line, field);
    }
    return v;
}

ShareMatrix load_dense_csv(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    const std::size_t n = lines.size();
    if (n == 0) throw ParseError("dense-csv: empty input");
    if (n < 2) throw ParseError("dense-csv: a ledger needs at least 2 peers, got " +
                                std::to_string(n));

    ShareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ls(lines[i]);
        while (std::getline(ls, cur, ',')) fields.push_back(cur);
        if (!lines[i].empty() && lines[i].back() == ',') fields.push_back("");
        if (fields.size() != n) {
            throw NonSquare("dense-csv line " + std::to_string(i + 1) + ": expected " +
                            std::to_string(n) + " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = parse_cell(fields[j], i + 1, j + 1);
            if (v < 0.0) {
                throw NegativeAmount("dense-csv line " + std::to_string(i + 1) + ", field " +
                                     std::to_string(j + 1) + ": negative amount " + fields[j]);
            }
            if (i == j && v != 0.0) {
                throw SelfTransaction("dense-csv line " + std::to_string(i + 1) +
                                      ": nonzero diagonal entry");
            }
            if (v != 0.0) m.record(static_cast<PeerId>(i), static_cast<PeerId>(j), v);
        }
    }
    return m;
}

ShareMatrix load_sparse_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("sparse-json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
        throw ParseError("sparse-json: expected an object with \"n\" and \"entries\"");
    }
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 2) {
        throw ParseError("sparse-json: \"n\" must be an integer >= 2");
    }
    if (!j["entries"].is_array()) {
        throw ParseError("sparse-json: \"entries\" must be an array");
    }
    const auto n = j["n"].get<std::size_t>();
    ShareMatrix m(n);
    std::size_t idx = 0;
    for (const auto& e : j["entries"]) {
        ++idx;
        if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("amount") ||
            !e["from"].is_number_integer() || !e["to"].is_number_integer() ||
            !e["amount"].is_number()) {
            throw ParseError("sparse-json entry " + std::to_string(idx) +
                                 ": expected {\"from\": int, \"to\": int, \"amount\": number}",
                             0, idx);
        }
        const long long from = e["from"].get<long long>();
        const long long to = e["to"].get<long long>();
        if (from < 0 || to < 0) {
            throw PeerOutOfRange("sparse-json entry " + std::to_string(idx) + ": negative peer id");
        }
        // Duplicate (from, to) pairs accumulate.
        m.record(static_cast<PeerId>(from), static_cast<PeerId>(to), e["amount"].get<double>());
    }
    return m;
}

void save_dense_csv(std::ostream& out, const ShareMatrix& m) {
    const std::size_t n = m.peer_count();
    for (PeerId i = 0; i < n; ++i) {
        for (PeerId j = 0; j < n; ++j) {
            if (j) out << ',';
            out << fmt17(m.at(i, j));
        }
        out << '\n';
    }
}

void save_sparse_json(std::ostream& out, const ShareMatrix& m) {
    json entries = json::array();
    for (PeerId i = 0; i < m.peer_count(); ++i) {
        for (const auto& [j, v] : m.row(i)) {
            entries.push_back({{"from", i}, {"to", j}, {"amount", v}});
        }
    }
    const json doc = {{"n", m.peer_count()}, {"entries", entries}};
    out << doc.dump() << '\n';
}

}  // namespace

ShareMatrix load_ledger(std::istream& in, LedgerFormat format) {
    return format == LedgerFormat::DenseCsv ? load_dense_csv(in) : load_sparse_json(in);
}

ShareMatrix load_ledger(const std::string& text, LedgerFormat format) {
    std::istringstream is(text);
    return load_ledger(is, format);
}

ShareMatrix load_ledger_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open ledger file: " + path.string());
    const auto ext = path.extension().string();
    if (ext == ".json") return load_ledger(in, LedgerFormat::SparseJson);
    if (ext == ".csv") return load_ledger(in, LedgerFormat::DenseCsv);
    throw Error("cannot infer ledger format from extension '" + ext + "' (use .csv or .json)");
}

void save_ledger(std::ostream& out, const ShareMatrix& ledger, LedgerFormat format) {
    if (format == LedgerFormat::DenseCsv) {
        save_dense_csv(out, ledger);
    } else {
        save_sparse_json(out, ledger);
    }
}

std::string save_ledger_string(const ShareMatrix& ledger, LedgerFormat format) {
    std::ostringstream os;
    save_ledger(os, ledger, format);
    return os.str();
}

}  // namespace bci
