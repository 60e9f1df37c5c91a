#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace bci {

using PeerId = std::uint32_t;

// Row/column totals of a share matrix. upload_totals[i] is what peer i has
// uploaded in total, download_totals[i] what it has downloaded.
struct LedgerSummary {
    std::vector<double> upload_totals;
    std::vector<double> download_totals;
    double total = 0.0;
};

// Sparse N x N ledger of uploaded amounts. Entry (i, j) is the cumulative
// amount peer i uploaded to peer j. Only positive amounts are stored; the
// diagonal is always zero. Plain value type: copy it for concurrent
// read-only use, mutate from one writer at a time.
class ShareMatrix {
public:
    explicit ShareMatrix(std::size_t n);

    std::size_t peer_count() const { return n_; }
    std::size_t entry_count() const;

    // Accumulates `amount` onto entry (uploader, downloader). Zero amounts
    // are a no-op but still validated.
    void record(PeerId uploader, PeerId downloader, double amount);

    double at(PeerId i, PeerId j) const;
    const std::map<PeerId, double>& row(PeerId i) const;

    // Peers that downloaded something but never uploaded anything.
    std::set<PeerId> free_riders() const;

    // True iff every peer's upload total matches its download total within tol.
    bool is_balanced(double tol) const;

    // True iff the digraph with an edge i -> j whenever (i, j) > 0 is
    // strongly connected.
    bool is_irreducible() const;

    LedgerSummary summary() const;

    // s * x and s^T * x, accumulated in fixed row-major entry order.
    std::vector<double> times(const std::vector<double>& x) const;
    std::vector<double> transpose_times(const std::vector<double>& x) const;

    bool operator==(const ShareMatrix&) const = default;

private:
    void check_peer(PeerId id) const;

    std::size_t n_;
    std::vector<std::map<PeerId, double>> rows_;
};

}  // namespace bci
