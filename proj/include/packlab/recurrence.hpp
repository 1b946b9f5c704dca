#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "packlab/packing.hpp"
#include "packlab/text.hpp"

namespace packlab {

// A finite window of a bi-infinite sequence; symbols are single characters.
struct SymbolicSequence {
    enum class Generator { explicit_, periodic, thue_morse };

    std::string alphabet;
    std::string symbols;
    long long origin = 0;  // index of symbols[0] in the bi-infinite sequence
    Generator generator = Generator::explicit_;
    std::size_t period = 0;  // periodic generator only

    void validate() const {
        if (symbols.empty()) {
            fail(ErrorKind::invalid_argument, "sequence window must be nonempty");
        }
        for (char c : symbols) {
            if (alphabet.find(c) == std::string::npos) {
                fail(ErrorKind::invalid_argument, std::string("symbol '") + c + "' is not in the alphabet");
            }
        }
        if (generator == Generator::periodic) {
            if (period == 0) {
                fail(ErrorKind::invalid_argument, "periodic sequence needs a positive period");
            }
            for (std::size_t i = 0; i + period < symbols.size(); ++i) {
                if (symbols[i] != symbols[i + period]) {
                    fail(ErrorKind::invalid_argument, "window is not consistent with period " + std::to_string(period));
                }
            }
        }
    }
};

// Parity of the binary digit sum of n.
inline int thue_morse(std::uint64_t n) { return std::popcount(n) & 1; }

inline SymbolicSequence thue_morse_prefix(std::size_t length) {
    require(length >= 1, "length must be at least 1");
    SymbolicSequence s;
    s.alphabet = "01";
    s.generator = SymbolicSequence::Generator::thue_morse;
    s.symbols.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        s.symbols[i] = static_cast<char>('0' + thue_morse(i));
    }
    return s;
}

// `length` symbols of the periodic sequence with the given period word.
inline SymbolicSequence periodic_sequence(const std::string& word, std::size_t length, std::string alphabet = {}) {
    require(!word.empty(), "period word must be nonempty");
    require(length >= 1, "length must be at least 1");
    SymbolicSequence s;
    if (alphabet.empty()) {
        for (char c : word) {
            if (alphabet.find(c) == std::string::npos) {
                alphabet.push_back(c);
            }
        }
        std::sort(alphabet.begin(), alphabet.end());
    }
    s.alphabet = std::move(alphabet);
    s.generator = SymbolicSequence::Generator::periodic;
    s.period = word.size();
    s.symbols.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        s.symbols[i] = word[i % word.size()];
    }
    s.validate();
    return s;
}

// Every finite word extends to a periodic sequence (repeat it); the result is
// uniformly recurrent, so finite patterns are limits of such sequences.
inline SymbolicSequence periodic_extension(const SymbolicSequence& s, std::size_t length) {
    s.validate();
    return periodic_sequence(s.symbols, length, s.alphabet);
}

struct RecurrenceReport {
    std::size_t factor_length = 0;
    std::size_t window_length = 0;
    std::size_t max_gap = 0;
    std::map<std::string, std::size_t> gaps;  // worst gap per factor (0: occurs once)
    std::size_t single_occurrences = 0;
    bool bounded = false;
};

// Largest distance between consecutive occurrences of each length-L factor.
inline RecurrenceReport recurrence_gaps(const SymbolicSequence& s, std::size_t L) {
    require(L >= 1, "factor length must be at least 1");
    s.validate();
    if (s.symbols.size() < 4 * L) {
        fail(ErrorKind::invalid_argument, "window must hold at least 4L symbols");
    }
    RecurrenceReport rep;
    rep.factor_length = L;
    rep.window_length = s.symbols.size();
    std::map<std::string, std::size_t> last;
    for (std::size_t i = 0; i + L <= s.symbols.size(); ++i) {
        std::string f = s.symbols.substr(i, L);
        auto it = last.find(f);
        if (it == last.end()) {
            rep.gaps[f] = 0;
            last.emplace(std::move(f), i);
        } else {
            std::size_t& g = rep.gaps[f];
            g = std::max(g, i - it->second);
            it->second = i;
        }
    }
    for (const auto& [f, g] : rep.gaps) {
        if (g == 0) {
            ++rep.single_occurrences;
        }
        rep.max_gap = std::max(rep.max_gap, g);
    }
    rep.bounded = rep.single_occurrences == 0 && 2 * rep.max_gap <= rep.window_length;
    return rep;
}

inline void write_report(std::ostream& out, const RecurrenceReport& r) {
    out << "factor_length: " << r.factor_length << '\n';
    out << "window_length: " << r.window_length << '\n';
    out << "factors: " << r.gaps.size() << '\n';
    out << "single_occurrences: " << r.single_occurrences << '\n';
    out << "max_gap: " << r.max_gap << '\n';
    out << "verdict: " << (r.bounded ? "bounded" : "unbounded-at-this-window") << '\n';
    for (const auto& [f, g] : r.gaps) {
        out << "gap " << f << ' ' << g << '\n';
    }
}

// Sequence file:
//
//   alphabet: 01
//   origin: 0
//   generator: explicit | periodic <p> | thue_morse
//   symbols: 0110...

inline void write_sequence(std::ostream& out, const SymbolicSequence& s) {
    out << "alphabet: " << s.alphabet << '\n';
    out << "origin: " << s.origin << '\n';
    out << "generator: ";
    switch (s.generator) {
        case SymbolicSequence::Generator::explicit_:
            out << "explicit";
            break;
        case SymbolicSequence::Generator::periodic:
            out << "periodic " << s.period;
            break;
        case SymbolicSequence::Generator::thue_morse:
            out << "thue_morse";
            break;
    }
    out << '\n';
    out << "symbols: " << s.symbols << '\n';
}

inline SymbolicSequence read_sequence(std::istream& in) {
    SymbolicSequence s;
    bool have_alphabet = false, have_symbols = false;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') {
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            fail(ErrorKind::parse, "sequence line without ':' key");
        }
        const std::string key = text::split(line.substr(0, colon)).empty() ? "" : text::split(line.substr(0, colon))[0];
        const auto value = text::split(line.substr(colon + 1));
        if (key == "alphabet") {
            if (value.size() != 1) {
                fail(ErrorKind::parse, "alphabet must be one token of distinct symbols");
            }
            s.alphabet = value[0];
            have_alphabet = true;
        } else if (key == "origin") {
            if (value.size() != 1) {
                fail(ErrorKind::parse, "origin needs one integer");
            }
            s.origin = text::to_int(value[0], "origin");
        } else if (key == "generator") {
            if (value.empty()) {
                fail(ErrorKind::parse, "generator needs a value");
            }
            if (value[0] == "explicit") {
                s.generator = SymbolicSequence::Generator::explicit_;
            } else if (value[0] == "thue_morse") {
                s.generator = SymbolicSequence::Generator::thue_morse;
            } else if (value[0] == "periodic" && value.size() == 2) {
                s.generator = SymbolicSequence::Generator::periodic;
                const long long p = text::to_int(value[1], "period");
                if (p <= 0) {
                    fail(ErrorKind::parse, "period must be positive");
                }
                s.period = static_cast<std::size_t>(p);
            } else {
                fail(ErrorKind::parse, "unknown generator");
            }
        } else if (key == "symbols") {
            for (const auto& tok : value) {
                s.symbols += tok;
            }
            have_symbols = true;
        } else {
            fail(ErrorKind::parse, "unknown sequence key '" + key + "'");
        }
    }
    if (!have_alphabet || !have_symbols) {
        fail(ErrorKind::parse, "sequence file needs alphabet and symbols lines");
    }
    try {
        s.validate();
    } catch (const Error& e) {
        fail(ErrorKind::parse, e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Limits of translates

struct LimitSearchOptions {
    std::optional<double> pitch;  // default epsilon / 2
    std::optional<Rect> range;    // translations scanned; default the host's domain
};

// A translation t with d(host + t, pattern) <= epsilon, matching restricted
// to elements meeting B(0, r). Candidates on a grid of pitch epsilon/2,
// tried in order of |t| (then x, y), so t = 0 comes first.
inline std::optional<Vec2> limit_translate_search(const Packing& host, const Packing& pattern, double r,
                                                  double epsilon, LimitSearchOptions opt = {}) {
    require(host.body() == pattern.body(), "host and pattern must share the same body");
    require(r > 0.0 && epsilon > 0.0, "r and epsilon must be positive");
    const double pitch = opt.pitch.value_or(0.5 * epsilon);
    require(pitch > 0.0, "pitch must be positive");
    const Rect range = opt.range.value_or(host.window().domain());

    std::vector<std::tuple<double, double, double>> ts;
    const int i0 = static_cast<int>(std::ceil(range.xmin / pitch - 1e-9));
    const int i1 = static_cast<int>(std::floor(range.xmax / pitch + 1e-9));
    const int j0 = static_cast<int>(std::ceil(range.ymin / pitch - 1e-9));
    const int j1 = static_cast<int>(std::floor(range.ymax / pitch + 1e-9));
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) {
            const double x = i * pitch;
            const double y = j * pitch;
            ts.emplace_back(std::hypot(x, y), x, y);
        }
    }
    std::sort(ts.begin(), ts.end());

    // For discs, d_H between copies is the centre distance, so each required
    // pattern element needs a host centre within epsilon: a cheap filter.
    std::vector<Vec2> anchors;
    const bool discs = host.body().is_disc();
    const double reach = r + host.body().radius() + 2.0 * epsilon + 2.0 * host.body().radius();
    std::optional<InstanceIndex> host_index;
    if (discs) {
        const Rect cover = range.expanded(reach);
        host_index.emplace(host, Rect{-cover.xmax, -cover.ymax, -cover.xmin, -cover.ymin}.expanded(reach));
        pattern.for_each_instance(Rect::centered({}, r + host.body().radius(), r + host.body().radius()),
                                  [&](const Instance& inst) {
                                      if (norm(inst.shape.center) <= r + inst.shape.radius) {
                                          anchors.push_back(inst.shape.center);
                                      }
                                  });
        std::sort(anchors.begin(), anchors.end(), [](Vec2 a, Vec2 b) { return norm(a) < norm(b); });
    }
    auto passes_filter = [&](Vec2 t) {
        for (const Vec2& a : anchors) {
            bool hit = false;
            host_index->near(a - t, epsilon, [&](const Instance& inst) {
                if (distance(inst.shape.center + t, a) <= epsilon) {
                    hit = true;
                }
                return !hit;
            });
            if (!hit) {
                return false;
            }
        }
        return true;
    };
    for (const auto& [len, x, y] : ts) {
        const Vec2 t{x, y};
        if (discs && !passes_filter(t)) {
            continue;
        }
        if (modified_hausdorff_leq(host, pattern, epsilon, r, t, false).verdict) {
            return t;
        }
    }
    return std::nullopt;
}

}  // namespace packlab
