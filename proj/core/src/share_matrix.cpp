#include "bci/share_matrix.hpp"

#include <stdexcept>
#include <string>

#include "bci/errors.hpp"
#include "bci/numeric.hpp"

namespace bci {

ShareMatrix::ShareMatrix(std::size_t n) : n_(n), rows_(n) {
    if (n < 2) {
        throw std::invalid_argument("ShareMatrix: peer count must be at least 2, got " +
                                    std::to_string(n));
    }
}

std::size_t ShareMatrix::entry_count() const {
    std::size_t c = 0;
    for (const auto& r : rows_) c += r.size();
    return c;
}

void ShareMatrix::check_peer(PeerId id) const {
    if (id >= n_) {
        throw PeerOutOfRange("peer id " + std::to_string(id) + " out of range [0, " +
                             std::to_string(n_) + ")");
    }
}

void ShareMatrix::record(PeerId uploader, PeerId downloader, double amount) {
    check_peer(uploader);
    check_peer(downloader);
    if (uploader == downloader) {
        throw SelfTransaction("peer " + std::to_string(uploader) + " cannot upload to itself");
    }
    if (amount < 0.0) {
        throw NegativeAmount("transaction amount must be nonnegative, got " +
                             std::to_string(amount));
    }
    if (amount == 0.0) return;
    rows_[uploader][downloader] += amount;
}

double ShareMatrix::at(PeerId i, PeerId j) const {
    check_peer(i);
    check_peer(j);
    const auto& r = rows_[i];
    const auto it = r.find(j);
    return it == r.end() ? 0.0 : it->second;
}

const std::map<PeerId, double>& ShareMatrix::row(PeerId i) const {
    check_peer(i);
    return rows_[i];
}

std::set<PeerId> ShareMatrix::free_riders() const {
    std::vector<bool> has_download(n_, false);
    for (const auto& r : rows_) {
        for (const auto& [j, v] : r) has_download[j] = true;
    }
    std::set<PeerId> out;
    for (PeerId i = 0; i < n_; ++i) {
        if (rows_[i].empty() && has_download[i]) out.insert(i);
    }
    return out;
}

bool ShareMatrix::is_balanced(double tol) const {
    if (tol < 0.0) throw std::invalid_argument("is_balanced: tolerance must be nonnegative");
    const LedgerSummary s = summary();
    for (std::size_t i = 0; i < n_; ++i) {
        if (std::abs(s.upload_totals[i] - s.download_totals[i]) > tol) return false;
    }
    return true;
}

bool ShareMatrix::is_irreducible() const {
    // Strong connectivity: everything reachable from node 0 in the graph and
    // in its reverse.
    std::vector<std::vector<PeerId>> fwd(n_), rev(n_);
    for (PeerId i = 0; i < n_; ++i) {
        for (const auto& [j, v] : rows_[i]) {
            fwd[i].push_back(j);
            rev[j].push_back(i);
        }
    }
    const auto reaches_all = [&](const std::vector<std::vector<PeerId>>& adj) {
        std::vector<bool> seen(n_, false);
        std::vector<PeerId> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const PeerId u = stack.back();
            stack.pop_back();
            for (const PeerId w : adj[u]) {
                if (!seen[w]) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n_;
    };
    return reaches_all(fwd) && reaches_all(rev);
}

LedgerSummary ShareMatrix::summary() const {
    LedgerSummary s;
    s.upload_totals.resize(n_, 0.0);
    s.download_totals.resize(n_, 0.0);
    std::vector<KahanSum> up(n_), down(n_);
    KahanSum total;
    for (PeerId i = 0; i < n_; ++i) {
        for (const auto& [j, v] : rows_[i]) {
            up[i].add(v);
            down[j].add(v);
            total.add(v);
        }
    }
    for (std::size_t i = 0; i < n_; ++i) {
        s.upload_totals[i] = up[i].value();
        s.download_totals[i] = down[i].value();
    }
    s.total = total.value();
    return s;
}

std::vector<double> ShareMatrix::times(const std::vector<double>& x) const {
    if (x.size() != n_) {
        throw DimensionMismatch("times: vector length " + std::to_string(x.size()) +
                                " does not match peer count " + std::to_string(n_));
    }
    std::vector<double> out(n_, 0.0);
    for (PeerId i = 0; i < n_; ++i) {
        KahanSum acc;
        for (const auto& [j, v] : rows_[i]) acc.add(v * x[j]);
        out[i] = acc.value();
    }
    return out;
}

std::vector<double> ShareMatrix::transpose_times(const std::vector<double>& x) const {
    if (x.size() != n_) {
        throw DimensionMismatch("transpose_times: vector length " + std::to_string(x.size()) +
                                " does not match peer count " + std::to_string(n_));
    }
    std::vector<KahanSum> acc(n_);
    for (PeerId i = 0; i < n_; ++i) {
        for (const auto& [j, v] : rows_[i]) acc[j].add(v * x[i]);
    }
    std::vector<double> out(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) out[j] = acc[j].value();
    return out;
}

}  // namespace bci
