#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bci/share_matrix.hpp"

namespace bci {

enum class LedgerFormat {
    DenseCsv,    // N lines of N comma-separated nonnegative decimals
    SparseJson,  // { "n": int, "entries": [ {"from", "to", "amount"}, ... ] }
};

ShareMatrix load_ledger(std::istream& in, LedgerFormat format);
ShareMatrix load_ledger(const std::string& text, LedgerFormat format);

// Picks the format from the file extension: .csv -> DenseCsv, .json -> SparseJson.
ShareMatrix load_ledger_file(const std::filesystem::path& path);

void save_ledger(std::ostream& out, const ShareMatrix& ledger, LedgerFormat format);
std::string save_ledger_string(const ShareMatrix& ledger, LedgerFormat format);

}  // namespace bci
