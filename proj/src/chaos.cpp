#include "wicklab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace wicklab::chaos {

// --- symbol spaces -----------------------------------------------------------

MatrixSymbolSpace::MatrixSymbolSpace(std::vector<std::vector<cplx>> kernel_matrix,
                                     std::vector<int> conj)
    : k(std::move(kernel_matrix)), conj_perm(std::move(conj)) {
    const std::size_t n = k.size();
    for (const auto& row : k)
        if (row.size() != n) throw std::invalid_argument("MatrixSymbolSpace: kernel not square");
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (k[a][b] != k[b][a])
                throw std::invalid_argument("MatrixSymbolSpace: kernel not symmetric");
    if (conj_perm.empty()) {
        conj_perm.resize(n);
        for (std::size_t i = 0; i < n; ++i) conj_perm[i] = int(i);
    }
    if (conj_perm.size() != n)
        throw std::invalid_argument("MatrixSymbolSpace: conjugation permutation size mismatch");
}

std::int64_t pack_freq(const FreqVec& n) {
    // 21 bits per signed coordinate, enough for any desk-scale cutoff
    std::int64_t p = std::int64_t(n.size());
    for (int c : n) {
        if (c < -(1 << 20) || c >= (1 << 20)) throw std::out_of_range("pack_freq: coordinate too large");
        p = (p << 21) | (std::int64_t(c) + (1 << 20));
    }
    return p;
}

int ModeSymbolSpace::add_mode(const FreqVec& freq, double time) {
    std::int64_t key = pack_freq(freq);
    auto it = index.find({key, time});
    if (it != index.end()) return it->second;

    FreqVec neg(freq.size());
    for (std::size_t i = 0; i < freq.size(); ++i) neg[i] = -freq[i];

    int id = int(freqs.size());
    freqs.push_back(freq);
    times.push_back(time);
    omega.push_back(std::pow(bracket(freq), alpha));
    packed.push_back(key);
    conj_ids.push_back(-1);
    index[{key, time}] = id;

    if (neg == freq) {
        conj_ids[std::size_t(id)] = id;
    } else {
        int nid = int(freqs.size());
        freqs.push_back(neg);
        times.push_back(time);
        omega.push_back(omega[std::size_t(id)]);
        packed.push_back(pack_freq(neg));
        conj_ids.push_back(id);
        conj_ids[std::size_t(id)] = nid;
        index[{packed.back(), time}] = nid;
    }
    return id;
}

cplx ModeSymbolSpace::kernel(int a, int b) const {
    const FreqVec& fa = freqs[std::size_t(a)];
    const FreqVec& fb = freqs[std::size_t(b)];
    for (std::size_t i = 0; i < fa.size(); ++i)
        if (fa[i] + fb[i] != 0) return cplx(0.0, 0.0);
    return cplx(std::cos((times[std::size_t(a)] - times[std::size_t(b)]) * omega[std::size_t(a)]),
                0.0);
}

// --- pairings ---------------------------------------------------------------

Partition singleton_partition(int j_total) {
    Partition p(static_cast<std::size_t>(j_total));
    for (int i = 0; i < j_total; ++i) p[std::size_t(i)] = {i};
    return p;
}

static std::vector<int> block_of_index(int j_total, const Partition& blocks) {
    std::vector<int> owner(std::size_t(j_total), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (int i : blocks[b]) {
            if (i < 0 || i >= j_total)
                throw std::invalid_argument("partition: index outside {0,...,J-1}");
            if (owner[std::size_t(i)] != -1)
                throw std::invalid_argument("partition: blocks overlap at index " + std::to_string(i));
            owner[std::size_t(i)] = int(b);
        }
    }
    for (int i = 0; i < j_total; ++i)
        if (owner[std::size_t(i)] == -1)
            throw std::invalid_argument("partition: index " + std::to_string(i) + " not covered");
    return owner;
}

namespace {

void enumerate_rec(int j_total, const std::vector<int>& owner, int ell,
                   std::vector<bool>& used, int from, std::vector<std::pair<int, int>>& cur,
                   std::vector<Pairing>& out) {
    if (int(cur.size()) == ell) {
        out.push_back({j_total, cur});
        return;
    }
    // find the smallest unused index to anchor the next pair
    int i = from;
    while (i < j_total && used[std::size_t(i)]) ++i;
    // remaining indices after i must still allow ell - cur pairs
    for (; i < j_total; ++i) {
        if (used[std::size_t(i)]) continue;
        used[std::size_t(i)] = true;
        for (int j = i + 1; j < j_total; ++j) {
            if (used[std::size_t(j)] || owner[std::size_t(i)] == owner[std::size_t(j)]) continue;
            used[std::size_t(j)] = true;
            cur.emplace_back(i, j);
            enumerate_rec(j_total, owner, ell, used, i + 1, cur, out);
            cur.pop_back();
            used[std::size_t(j)] = false;
        }
        used[std::size_t(i)] = false;
    }
}

} // namespace

std::vector<Pairing> enumerate_pairings(int j_total, const Partition& blocks, int ell) {
    if (ell < 0 || 2 * ell > j_total)
        throw std::invalid_argument("enumerate_pairings: need 0 <= ell <= J/2");
    std::vector<int> owner = block_of_index(j_total, blocks);
    std::vector<Pairing> out;
    if (ell == 0) {
        out.push_back({j_total, {}});
        return out;
    }
    std::vector<bool> used(std::size_t(j_total), false);
    std::vector<std::pair<int, int>> cur;
    enumerate_rec(j_total, owner, ell, used, 0, cur, out);
    return out;
}

// --- moments ----------------------------------------------------------------

namespace {

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (int x : v) {
            h ^= std::size_t(x) + 0x9e3779b9;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

// multiset moment over distinct symbols with multiplicities
cplx multiset_moment(std::vector<int>& counts, const std::vector<int>& ids,
                     const SymbolSpace& space,
                     std::unordered_map<std::vector<int>, cplx, VecHash>& memo) {
    int total = 0;
    for (int c : counts) total += c;
    if (total == 0) return cplx(1.0, 0.0);
    if (total % 2 != 0) return cplx(0.0, 0.0);

    auto it = memo.find(counts);
    if (it != memo.end()) return it->second;

    std::size_t a = 0;
    while (counts[a] == 0) ++a;

    cplx acc(0.0, 0.0);
    counts[a] -= 1;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (counts[b] == 0) continue;
        cplx k = space.kernel(ids[a], ids[b]);
        if (k == cplx(0.0, 0.0)) continue;
        double mult = double(counts[b]);
        counts[b] -= 1;
        acc += mult * k * multiset_moment(counts, ids, space, memo);
        counts[b] += 1;
    }
    counts[a] += 1;

    memo.emplace(counts, acc);
    return acc;
}

} // namespace

cplx isserlis(const GaussianMonomial& m) {
    if (m.symbols.empty()) return cplx(1.0, 0.0);
    if (m.symbols.size() % 2 != 0) return cplx(0.0, 0.0);

    std::vector<int> ids = m.symbols;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<int> counts(ids.size(), 0);
    for (int s : m.symbols)
        counts[std::size_t(std::lower_bound(ids.begin(), ids.end(), s) - ids.begin())] += 1;

    std::unordered_map<std::vector<int>, cplx, VecHash> memo;
    return multiset_moment(counts, ids, *m.space, memo);
}

namespace {

cplx block_moment_rec(std::vector<int>& syms, std::vector<int>& owner, const SymbolSpace& space) {
    std::size_t i = 0;
    while (i < syms.size() && syms[i] < 0) ++i;
    if (i == syms.size()) return cplx(1.0, 0.0);

    int a = syms[i];
    syms[i] = -1;
    cplx acc(0.0, 0.0);
    for (std::size_t j = i + 1; j < syms.size(); ++j) {
        if (syms[j] < 0 || owner[j] == owner[i]) continue;
        cplx k = space.kernel(a, syms[j]);
        if (k == cplx(0.0, 0.0)) continue;
        int saved = syms[j];
        syms[j] = -1;
        acc += k * block_moment_rec(syms, owner, space);
        syms[j] = saved;
    }
    syms[i] = a;
    return acc;
}

} // namespace

cplx wick_block_moment(const std::vector<std::vector<int>>& blocks, const SymbolSpace& space) {
    std::vector<int> syms, owner;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int s : blocks[b]) {
            syms.push_back(s);
            owner.push_back(int(b));
        }
    if (syms.size() % 2 != 0) return cplx(0.0, 0.0);
    if (syms.empty()) return cplx(1.0, 0.0);
    return block_moment_rec(syms, owner, space);
}

// --- chaos components ---------------------------------------------------------

namespace {

void merge_term(std::vector<WickMonomial>& terms,
                std::unordered_map<std::vector<int>, std::size_t, VecHash>& where,
                cplx w, std::vector<int> syms) {
    std::sort(syms.begin(), syms.end());
    auto it = where.find(syms);
    if (it != where.end()) {
        terms[it->second].w += w;
    } else {
        where.emplace(syms, terms.size());
        terms.push_back({w, std::move(syms)});
    }
}

void drop_zero_terms(WickComponent& c) {
    std::vector<WickMonomial> kept;
    for (auto& t : c.terms)
        if (t.w != cplx(0.0, 0.0)) kept.push_back(std::move(t));
    c.terms = std::move(kept);
}

} // namespace

std::vector<WickComponent> wick_decompose(const GaussianMonomial& m, const Partition& blocks) {
    const int k_total = int(m.symbols.size());
    std::vector<int> owner = block_of_index(k_total, blocks); // validates
    (void)owner;

    std::vector<WickComponent> comps;
    for (int ell = 0; 2 * ell <= k_total; ++ell) {
        WickComponent c;
        c.order = k_total - 2 * ell;
        c.space = m.space;
        std::unordered_map<std::vector<int>, std::size_t, VecHash> where;
        for (const Pairing& p : enumerate_pairings(k_total, blocks, ell)) {
            cplx w(1.0, 0.0);
            std::vector<bool> paired(std::size_t(k_total), false);
            for (auto [i, j] : p.pairs) {
                w *= m.space->kernel(m.symbols[std::size_t(i)], m.symbols[std::size_t(j)]);
                paired[std::size_t(i)] = paired[std::size_t(j)] = true;
            }
            if (w == cplx(0.0, 0.0)) continue;
            std::vector<int> rest;
            for (int i = 0; i < k_total; ++i)
                if (!paired[std::size_t(i)]) rest.push_back(m.symbols[std::size_t(i)]);
            merge_term(c.terms, where, w, std::move(rest));
        }
        drop_zero_terms(c);
        comps.push_back(std::move(c));
    }
    return comps;
}

cplx permanent(const std::vector<std::vector<cplx>>& m) {
    const std::size_t n = m.size();
    if (n == 0) return cplx(1.0, 0.0);
    // Ryser with Gray-code updates of the running column sums
    std::vector<cplx> row_sum(n, cplx(0.0, 0.0));
    cplx total(0.0, 0.0);
    std::uint64_t prev = 0;
    for (std::uint64_t g = 1; g < (1ULL << n); ++g) {
        std::uint64_t gray = g ^ (g >> 1);
        std::uint64_t diff = gray ^ prev;
        int col = 0;
        while (!((diff >> col) & 1ULL)) ++col;
        double sgn_col = (gray >> col) & 1ULL ? 1.0 : -1.0;
        for (std::size_t r = 0; r < n; ++r) row_sum[r] += sgn_col * m[r][std::size_t(col)];
        prev = gray;

        cplx prod(1.0, 0.0);
        for (std::size_t r = 0; r < n; ++r) prod *= row_sum[r];
        int bits = __builtin_popcountll(gray);
        double sgn = ((std::uint64_t(n) - std::uint64_t(bits)) % 2 == 0) ? 1.0 : -1.0;
        total += sgn * prod;
    }
    return total;
}

namespace {

std::vector<std::int64_t> bucket_signature(const WickMonomial& t, const SymbolSpace& space) {
    std::vector<std::int64_t> key;
    key.reserve(t.symbols.size());
    for (int s : t.symbols) key.push_back(space.bucket_key(s));
    std::sort(key.begin(), key.end());
    return key;
}

struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (std::int64_t x : v) {
            h ^= std::size_t(x) + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

} // namespace

cplx chaos_covariance(const WickComponent& a, const WickComponent& b) {
    if (a.order != b.order) return cplx(0.0, 0.0);
    if (a.terms.empty() || b.terms.empty()) return cplx(0.0, 0.0);
    const SymbolSpace& space = *a.space;
    const std::size_t n = std::size_t(a.order);

    if (n == 0) {
        cplx sa(0.0, 0.0), sb(0.0, 0.0);
        for (const auto& t : a.terms) sa += t.w;
        for (const auto& t : b.terms) sb += t.w;
        return sa * std::conj(sb);
    }

    // group the b-terms by bucket signature; only matching groups can pair
    std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> groups;
    for (std::size_t j = 0; j < b.terms.size(); ++j)
        groups[bucket_signature(b.terms[j], space)].push_back(j);

    cplx acc(0.0, 0.0);
    std::vector<std::vector<cplx>> mat(n, std::vector<cplx>(n));
    for (const auto& ta : a.terms) {
        auto it = groups.find(bucket_signature(ta, space));
        if (it == groups.end()) continue;
        for (std::size_t j : it->second) {
            const auto& tb = b.terms[j];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    mat[r][c] = space.kernel(ta.symbols[r], space.conj_id(tb.symbols[c]));
            acc += ta.w * std::conj(tb.w) * permanent(mat);
        }
    }
    return acc;
}

// --- hypercontractivity -------------------------------------------------------

namespace {

// plain polynomial over symbols: multiplicity vector (indexed by symbol id
// over a compact local basis) -> coefficient
struct GaussPoly {
    std::vector<int> basis; // sorted symbol ids
    std::unordered_map<std::vector<int>, cplx, VecHash> terms;
};

std::size_t basis_pos(const std::vector<int>& basis, int id) {
    return std::size_t(std::lower_bound(basis.begin(), basis.end(), id) - basis.begin());
}

// inverse Wick transform: :x_0...x_{m-1}: as a plain polynomial,
// sum over partial pairings with sign (-1)^{pairs}
void unwick_rec(const std::vector<int>& syms, std::size_t i, std::vector<bool>& used,
                cplx w, std::vector<int>& expo, const std::vector<int>& basis,
                const SymbolSpace& space, GaussPoly& out) {
    while (i < syms.size() && used[i]) ++i;
    if (i == syms.size()) {
        out.terms[expo] += w;
        return;
    }
    used[i] = true;
    // unpaired: contributes the factor itself
    expo[basis_pos(basis, syms[i])] += 1;
    unwick_rec(syms, i + 1, used, w, expo, basis, space, out);
    expo[basis_pos(basis, syms[i])] -= 1;
    // paired with a later factor, sign flip
    for (std::size_t j = i + 1; j < syms.size(); ++j) {
        if (used[j]) continue;
        cplx k = space.kernel(syms[i], syms[j]);
        if (k == cplx(0.0, 0.0)) continue;
        used[j] = true;
        unwick_rec(syms, i + 1, used, -w * k, expo, basis, space, out);
        used[j] = false;
    }
    used[i] = false;
}

GaussPoly to_plain_poly(const WickComponent& x, bool conjugate) {
    GaussPoly p;
    const SymbolSpace& space = *x.space;
    for (const auto& t : x.terms)
        for (int s : t.symbols) {
            int id = conjugate ? space.conj_id(s) : s;
            p.basis.push_back(id);
        }
    std::sort(p.basis.begin(), p.basis.end());
    p.basis.erase(std::unique(p.basis.begin(), p.basis.end()), p.basis.end());

    for (const auto& t : x.terms) {
        std::vector<int> syms = t.symbols;
        if (conjugate)
            for (int& s : syms) s = space.conj_id(s);
        cplx w = conjugate ? std::conj(t.w) : t.w;
        std::vector<bool> used(syms.size(), false);
        std::vector<int> expo(p.basis.size(), 0);
        unwick_rec(syms, 0, used, w, expo, p.basis, space, p);
    }
    return p;
}

GaussPoly poly_mul(const GaussPoly& a, const GaussPoly& b) {
    // merge bases
    GaussPoly out;
    out.basis = a.basis;
    for (int id : b.basis)
        if (!std::binary_search(out.basis.begin(), out.basis.end(), id)) out.basis.push_back(id);
    std::sort(out.basis.begin(), out.basis.end());

    auto lift = [&out](const std::vector<int>& basis, const std::vector<int>& expo) {
        std::vector<int> e(out.basis.size(), 0);
        for (std::size_t i = 0; i < basis.size(); ++i)
            e[basis_pos(out.basis, basis[i])] = expo[i];
        return e;
    };

    for (const auto& [ea, wa] : a.terms)
        for (const auto& [eb, wb] : b.terms) {
            std::vector<int> e = lift(a.basis, ea);
            std::vector<int> e2 = lift(b.basis, eb);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += e2[i];
            out.terms[e] += wa * wb;
            if (out.terms.size() > 2000000)
                throw std::runtime_error("hyper_check: polynomial expansion too large");
        }
    return out;
}

cplx poly_expect(const GaussPoly& p, const SymbolSpace& space) {
    cplx acc(0.0, 0.0);
    std::unordered_map<std::vector<int>, cplx, VecHash> memo;
    for (const auto& [e, w] : p.terms) {
        if (w == cplx(0.0, 0.0)) continue;
        std::vector<int> counts = e;
        acc += w * multiset_moment(counts, p.basis, space, memo);
    }
    return acc;
}

} // namespace

double hyper_check(const WickComponent& x, int p) {
    if (p < 2 || p % 2 != 0) throw std::invalid_argument("hyper_check: p must be even and >= 2");
    if (x.terms.empty()) throw std::invalid_argument("hyper_check: empty component");

    GaussPoly plain = to_plain_poly(x, false);
    GaussPoly plain_conj = to_plain_poly(x, true);
    GaussPoly sq = poly_mul(plain, plain_conj); // |X|^2

    GaussPoly pw = sq;
    for (int i = 1; i < p / 2; ++i) pw = poly_mul(pw, sq);

    double l2sq = poly_expect(sq, *x.space).real();
    double lpp = poly_expect(pw, *x.space).real();
    if (l2sq <= 0.0) throw std::runtime_error("hyper_check: component has zero L2 norm");
    return std::pow(lpp, 1.0 / double(p)) / std::sqrt(l2sq);
}

// --- block sums ----------------------------------------------------------------

namespace {

// interaction signature: counts of f minus counts of -f per positive class
std::vector<std::int64_t> freq_signature(const BlockTerm& t, const SymbolSpace& space) {
    std::map<std::int64_t, int> net;
    for (const auto& blk : t.blocks)
        for (int s : blk) {
            std::int64_t k = space.bucket_key(s);
            std::int64_t kc = space.bucket_key(space.conj_id(s));
            if (k == kc) continue; // self-conjugate class contributes parity only below
            if (k < kc)
                net[k] += 1;
            else
                net[kc] -= 1;
        }
    std::vector<std::int64_t> sig;
    for (auto& [k, v] : net)
        if (v != 0) {
            sig.push_back(k);
            sig.push_back(v);
        }
    return sig;
}

} // namespace

double full_moment(const BlockSum& bs, const SymbolSpace& space) {
    struct Item {
        std::size_t idx;
    };
    std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> groups;
    for (std::size_t i = 0; i < bs.size(); ++i) groups[freq_signature(bs[i], space)].push_back(i);

    double acc = 0.0;
    for (const auto& [sig, idxs] : groups) {
        for (std::size_t ii = 0; ii < idxs.size(); ++ii) {
            for (std::size_t jj = 0; jj < idxs.size(); ++jj) {
                const BlockTerm& ta = bs[idxs[ii]];
                const BlockTerm& tb = bs[idxs[jj]];
                std::vector<std::vector<int>> blocks = ta.blocks;
                for (const auto& blk : tb.blocks) {
                    std::vector<int> cb;
                    cb.reserve(blk.size());
                    for (int s : blk) cb.push_back(space.conj_id(s));
                    blocks.push_back(std::move(cb));
                }
                cplx m = wick_block_moment(blocks, space);
                acc += (ta.w * std::conj(tb.w) * m).real();
            }
        }
    }
    return acc;
}

WickComponent project_block_sum(const BlockSum& bs, int ell, const SymbolSpace& space) {
    WickComponent c;
    c.space = &space;
    c.order = -1;
    std::unordered_map<std::vector<int>, std::size_t, VecHash> where;
    for (const BlockTerm& t : bs) {
        std::vector<int> syms;
        Partition blocks;
        for (const auto& blk : t.blocks) {
            std::vector<int> ids;
            for (int s : blk) {
                ids.push_back(int(syms.size()));
                syms.push_back(s);
            }
            blocks.push_back(std::move(ids));
        }
        const int k_total = int(syms.size());
        if (c.order == -1) c.order = k_total - 2 * ell;
        if (k_total - 2 * ell != c.order)
            throw std::invalid_argument("project_block_sum: mixed total orders");

        for (const Pairing& p : enumerate_pairings(k_total, blocks, ell)) {
            cplx w = t.w;
            std::vector<bool> paired(std::size_t(k_total), false);
            for (auto [i, j] : p.pairs) {
                w *= space.kernel(syms[std::size_t(i)], syms[std::size_t(j)]);
                paired[std::size_t(i)] = paired[std::size_t(j)] = true;
            }
            if (w == cplx(0.0, 0.0)) continue;
            std::vector<int> rest;
            for (int i = 0; i < k_total; ++i)
                if (!paired[std::size_t(i)]) rest.push_back(syms[std::size_t(i)]);
            merge_term(c.terms, where, w, std::move(rest));
        }
    }
    if (c.order == -1) c.order = 0;
    drop_zero_terms(c);
    return c;
}

} // namespace wicklab::chaos
