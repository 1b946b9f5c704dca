// Command-line front end: generate packings, test saturation, compute
// diffusion fields, Voronoi pieces, recurrence reports and figures.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "packlab/packlab.hpp"

using namespace packlab;

namespace {

// Exit statuses, one per failure category.
enum Exit : int {
    ok = 0,
    invalid_argument = 2,
    parse_error = 3,
    invariant = 4,
    budget = 5,
    io_error = 6,
    internal = 70,
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_argument:
            return Exit::invalid_argument;
        case ErrorKind::parse:
            return Exit::parse_error;
        case ErrorKind::invariant:
            return Exit::invariant;
        case ErrorKind::budget:
            return Exit::budget;
    }
    return Exit::internal;
}

// Effective configuration, echoed to stderr before any work.
class Config {
public:
    explicit Config(std::string command) : command_(std::move(command)) {}

    template <typename T>
    Config& add(const std::string& key, const T& value) {
        std::ostringstream s;
        s << value;
        items_.emplace_back(key, s.str());
        return *this;
    }
    Config& add(const std::string& key, double value) {
        items_.emplace_back(key, text::g17(value));
        return *this;
    }
    Config& add(const std::string& key, const Rect& r) {
        items_.emplace_back(key, text::g17(r.xmin) + "," + text::g17(r.ymin) + "," + text::g17(r.xmax) + "," +
                                     text::g17(r.ymax));
        return *this;
    }

    void echo() const {
        std::cerr << "config: command=" << command_;
        for (const auto& [k, v] : items_) {
            std::cerr << ' ' << k << '=' << v;
        }
        std::cerr << '\n';
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> items_;
};

Packing load_packing(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_packing(in);
}

template <typename Fn>
void write_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    fn(out);
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

std::optional<Rect> parse_rect(const std::vector<double>& v) {
    if (v.empty()) {
        return std::nullopt;
    }
    if (v.size() != 4 || !(v[0] <= v[2]) || !(v[1] <= v[3])) {
        fail(ErrorKind::invalid_argument, "region needs xmin ymin xmax ymax with min <= max");
    }
    return Rect{v[0], v[1], v[2], v[3]};
}

void print_placement(std::ostream& out, const char* tag, const Placement& q) {
    out << tag << ' ' << text::g17(q.iso.translation.x) << ' ' << text::g17(q.iso.translation.y) << ' '
        << text::g17(q.iso.angle) << ' ' << (q.iso.reflected ? 1 : 0) << '\n';
}

// Measure shared by field and dominance commands.
struct MeasureArgs {
    int n = 1;
    double h = 0.05;
    double cutoff = 0.0;  // 0: default for n and the body diameter

    GridMeasure build(double diameter, Config& cfg) const {
        const double c = cutoff > 0.0 ? cutoff : lemma_default_cutoff(n, diameter);
        cfg.add("n", n).add("h", h).add("cutoff", c).add("diameter", diameter);
        return lemma_mu(n, h, c, diameter);
    }

    void attach(CLI::App* app) {
        app->add_option("--n", n, "replacement size the measure separates")->check(CLI::PositiveNumber);
        app->add_option("--h", h, "grid pitch")->check(CLI::PositiveNumber);
        app->add_option("--cutoff", cutoff, "support radius (default: density 1e-6, at most 40 diameters)");
    }
};

FieldMethod parse_method(const std::string& s) {
    if (s == "auto") return FieldMethod::automatic;
    if (s == "direct") return FieldMethod::direct;
    if (s == "fft") return FieldMethod::fft;
    fail(ErrorKind::invalid_argument, "method must be auto, direct or fft");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"packlab: saturated packings, diffusion fields and recurrence"};
    app.require_subcommand(1);
    // "-h" stays free: several commands take a grid pitch "--h".
    app.set_help_flag("--help", "print this help and exit");
    app.set_version_flag("--version", "packlab 1.0");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a packing family");
    std::string family;
    double radius = 0.5;
    std::string window_kind = "torus";
    double width = 0.0, height = 0.0, pitch = 0.0;
    std::uint64_t seed = 1;
    std::size_t count = 0;
    std::string gen_out;
    gen->add_option("family", family, "hexagonal | square_lattice | figure1_defect | sparse_random")->required();
    gen->add_option("--radius", radius, "disc radius")->check(CLI::PositiveNumber);
    gen->add_option("--window", window_kind, "torus or box")->check(CLI::IsMember({"torus", "box"}));
    gen->add_option("--width", width, "window width (default depends on the family)");
    gen->add_option("--height", height, "window height");
    gen->add_option("--pitch", pitch, "square lattice pitch (default 2r)");
    gen->add_option("--seed", seed, "sparse_random seed");
    gen->add_option("--count", count, "sparse_random disc count");
    gen->add_option("-o,--output", gen_out, "output file (default stdout)");

    // density
    auto* dens = app.add_subcommand("density", "density of a periodic packing, or of a ball");
    std::string dens_in;
    double ball_r = 0.0;
    std::vector<double> ball_c;
    dens->add_option("packing", dens_in)->required();
    dens->add_option("--ball", ball_r, "radius of the ball (omit for the periodic density)");
    dens->add_option("--center", ball_c, "ball centre x y")->expected(2);

    // check-sat
    auto* chk = app.add_subcommand("check-sat", "search for a replacement of k < n copies by k+1");
    std::string chk_in;
    SearchOptions sopt;
    int chk_n = 1;
    std::vector<double> chk_region;
    chk->add_option("packing", chk_in)->required();
    chk->add_option("--n", chk_n, "largest number of copies removed plus one")->check(CLI::PositiveNumber);
    chk->add_option("--h", sopt.h, "search resolution")->check(CLI::PositiveNumber);
    chk->add_option("--region", chk_region, "xmin ymin xmax ymax (default: whole window)")->expected(4);
    chk->add_option("--angles", sopt.angle_steps, "rotations tried for polygon bodies");
    chk->add_flag("--reflections", sopt.reflections, "also try mirrored copies");
    chk->add_flag("--connected", sopt.require_connected, "only accept connected replacements");
    chk->add_option("--budget", sopt.node_budget, "candidate evaluations allowed for k >= 1");

    // saturate
    auto* sat = app.add_subcommand("saturate", "apply connected replacements until none is found");
    std::string sat_in, sat_trace, sat_terminal;
    int sat_n = 1;
    double sat_h = 0.1;
    std::size_t sat_moves = 1000;
    std::vector<double> sat_region, sat_margin;
    sat->add_option("packing", sat_in)->required();
    sat->add_option("--n", sat_n)->check(CLI::PositiveNumber);
    sat->add_option("--h", sat_h)->check(CLI::PositiveNumber);
    sat->add_option("--region", sat_region, "search region xmin ymin xmax ymax")->expected(4);
    sat->add_option("--margin-region", sat_margin, "region for the field margins")->expected(4);
    sat->add_option("--moves", sat_moves, "move budget");
    sat->add_option("--trace", sat_trace, "trace output file (default stdout)");
    sat->add_option("--terminal", sat_terminal, "also write the terminal packing here");

    // field
    auto* fld = app.add_subcommand("field", "convolve a packing with the separating measure");
    std::string fld_in, fld_out, fld_method = "auto";
    std::vector<double> fld_region;
    MeasureArgs fld_mu;
    fld->add_option("packing", fld_in)->required();
    fld_mu.attach(fld);
    fld->add_option("--region", fld_region, "xmin ymin xmax ymax")->expected(4)->required();
    fld->add_option("--method", fld_method, "auto | direct | fft");
    fld->add_option("-o,--output", fld_out, "field file (default stdout)");

    // dominate
    auto* dom = app.add_subcommand("dominate", "compare the fields of two packings pointwise");
    std::string dom_a, dom_b;
    std::vector<double> dom_region;
    std::optional<double> dom_tau;
    MeasureArgs dom_mu;
    dom->add_option("first", dom_a)->required();
    dom->add_option("second", dom_b)->required();
    dom_mu.attach(dom);
    dom->add_option("--region", dom_region, "xmin ymin xmax ymax")->expected(4)->required();
    dom->add_option("--tau", dom_tau, "tolerance (must exceed the numeric error bound)");

    // voronoi
    auto* vor = app.add_subcommand("voronoi", "Voronoi cells, hexagon deviation and truncated pieces");
    std::string vor_in, vor_out;
    std::optional<double> vor_area;
    vor->add_option("packing", vor_in)->required();
    vor->add_option("--piece-area", vor_area, "truncate every cell to this area");
    vor->add_option("-o,--output", vor_out, "cell/piece polygons (default stdout)");

    // recur
    auto* rec = app.add_subcommand("recur", "recurrence gaps of a symbolic sequence");
    std::size_t rec_tm = 0, rec_L = 1;
    std::string rec_file;
    auto* tm_opt = rec->add_option("--thue-morse", rec_tm, "use the first N Thue-Morse symbols");
    auto* file_opt = rec->add_option("--file", rec_file, "sequence file");
    tm_opt->excludes(file_opt);
    rec->add_option("--L", rec_L, "factor length")->check(CLI::PositiveNumber);

    // limit
    auto* lim = app.add_subcommand("limit", "find t with d(host + t, pattern) <= eps on B(0, r)");
    std::string lim_host, lim_pattern;
    double lim_r = 1.0, lim_eps = 0.05;
    lim->add_option("host", lim_host)->required();
    lim->add_option("pattern", lim_pattern)->required();
    lim->add_option("--r", lim_r)->check(CLI::PositiveNumber);
    lim->add_option("--eps", lim_eps)->check(CLI::PositiveNumber);

    // render
    auto* ren = app.add_subcommand("render", "SVG of a packing or of a built-in figure");
    std::string ren_in, ren_out;
    int ren_figure = 0;
    int ren_k = 3;
    ren->add_option("packing", ren_in, "packing file");
    ren->add_option("--figure", ren_figure, "1: defect beside hexagonal; 4: strings of squares")
        ->check(CLI::IsMember({1, 4}));
    ren->add_option("--k", ren_k, "largest string length for figure 4")->check(CLI::PositiveNumber);
    ren->add_option("-o,--output", ren_out, "SVG file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 64;
    }

    try {
        if (gen->parsed()) {
            const auto f = parse_family(family);
            if (!f) {
                fail(ErrorKind::invalid_argument, "unknown family '" + family + "'");
            }
            FamilySpec spec;
            spec.family = *f;
            spec.radius = radius;
            spec.pitch = pitch;
            spec.seed = seed;
            spec.count = count;
            double w = width, h = height;
            if (w <= 0.0 || h <= 0.0) {
                const double p = pitch > 0.0 ? pitch : 2.0 * radius;
                const Window d = (*f == FamilySpec::Family::square_lattice || *f == FamilySpec::Family::sparse_random)
                                     ? Window::torus(8.0 * p, 8.0 * p)
                                     : figure1_window(radius);
                w = w > 0.0 ? w : d.width;
                h = h > 0.0 ? h : d.height;
            }
            spec.window = window_kind == "torus" ? Window::torus(w, h) : Window::box(w, h);
            Config cfg("gen");
            cfg.add("family", to_string(*f)).add("radius", radius).add("window", window_kind).add("width", w)
                .add("height", h);
            if (*f == FamilySpec::Family::square_lattice) cfg.add("pitch", pitch > 0.0 ? pitch : 2.0 * radius);
            if (*f == FamilySpec::Family::sparse_random) cfg.add("seed", seed).add("count", count);
            cfg.echo();
            const Packing p = generate(spec);
            write_output(gen_out, [&](std::ostream& out) { write_packing(out, p); });
            std::cerr << "placements: " << p.size() << '\n';
        } else if (dens->parsed()) {
            const Packing p = load_packing(dens_in);
            Config cfg("density");
            cfg.add("packing", dens_in);
            if (ball_r > 0.0) {
                const Vec2 c = ball_c.size() == 2 ? Vec2{ball_c[0], ball_c[1]} : Vec2{};
                cfg.add("ball", ball_r).add("center_x", c.x).add("center_y", c.y).echo();
                std::printf("density_in_ball: %.6f\n", density_in_ball(p, c, ball_r));
            } else {
                cfg.echo();
                std::printf("density: %.6f\n", density(p));
            }
        } else if (chk->parsed()) {
            const Packing p = load_packing(chk_in);
            const Rect region = parse_rect(chk_region).value_or(p.window().domain());
            Config cfg("check-sat");
            cfg.add("packing", chk_in).add("n", chk_n).add("h", sopt.h).add("region", region)
                .add("angles", sopt.angle_steps).add("reflections", sopt.reflections)
                .add("connected", sopt.require_connected).add("budget", sopt.node_budget).echo();
            const auto v = check_n_saturated(p, chk_n, region, sopt);
            std::cout << "outcome: " << to_string(v.outcome) << '\n';
            std::cout << "resolution: " << text::g17(v.resolution) << '\n';
            std::cout << "evaluations: " << v.evaluations << '\n';
            if (v.move) {
                std::cout << "move: remove " << v.move->removed.size() << " insert " << v.move->inserted.size()
                          << " connected " << (v.move->connected ? 1 : 0) << '\n';
                for (const auto& q : v.move->removed) print_placement(std::cout, "removed", q);
                for (const auto& q : v.move->inserted) print_placement(std::cout, "inserted", q);
            }
        } else if (sat->parsed()) {
            const Packing p = load_packing(sat_in);
            const Rect region = parse_rect(sat_region).value_or(p.window().domain());
            IterateOptions io;
            io.margin_region = parse_rect(sat_margin);
            Config cfg("saturate");
            cfg.add("packing", sat_in).add("n", sat_n).add("h", sat_h).add("region", region)
                .add("margin_region", io.margin_region.value_or(region)).add("moves", sat_moves).echo();
            const IterationTrace t = saturation_iterate(p, sat_n, region, sat_h, sat_moves, io);
            write_output(sat_trace, [&](std::ostream& out) { write_trace(out, t); });
            if (!sat_terminal.empty()) {
                write_output(sat_terminal, [&](std::ostream& out) { write_packing(out, t.terminal); });
            }
            std::cerr << "moves: " << t.moves.size() << " terminal: " << t.terminal.size()
                      << (t.exhausted ? " (move budget reached)" : "")
                      << (t.search_exhausted ? " (search budget reached)" : "") << '\n';
        } else if (fld->parsed()) {
            const Packing p = load_packing(fld_in);
            const Rect region = *parse_rect(fld_region);
            Config cfg("field");
            cfg.add("packing", fld_in).add("region", region).add("method", fld_method);
            const GridMeasure mu = fld_mu.build(p.body().diameter(), cfg);
            cfg.echo();
            const Field f = convolve_field(p, mu, region, parse_method(fld_method));
            write_output(fld_out, [&](std::ostream& out) { write_field(out, f); });
        } else if (dom->parsed()) {
            const Packing a = load_packing(dom_a);
            const Packing b = load_packing(dom_b);
            require(a.body() == b.body(), "both packings must use the same body");
            const Rect region = *parse_rect(dom_region);
            Config cfg("dominate");
            cfg.add("first", dom_a).add("second", dom_b).add("region", region);
            if (dom_tau) cfg.add("tau", *dom_tau);
            const GridMeasure mu = dom_mu.build(a.body().diameter(), cfg);
            cfg.echo();
            const auto v = dominates(convolve_field(a, mu, region), convolve_field(b, mu, region), dom_tau);
            std::cout << "outcome: " << to_string(v.outcome) << '\n';
            std::cout << "worst_margin: " << text::g17(v.worst_margin) << " at " << text::g17(v.worst_location.x)
                      << ' ' << text::g17(v.worst_location.y) << '\n';
            std::cout << "tolerance: " << text::g17(v.tolerance) << '\n';
            std::cout << "error_bound: " << text::g17(v.error_bound) << '\n';
        } else if (vor->parsed()) {
            const Packing p = load_packing(vor_in);
            Config cfg("voronoi");
            cfg.add("packing", vor_in);
            if (vor_area) cfg.add("piece_area", *vor_area);
            cfg.echo();
            const auto cs = cells(p);
            const double r = p.body().radius();
            std::vector<Piece> pieces;
            double worst = 0.0;
            write_output(vor_out, [&](std::ostream& out) {
                for (const auto& c : cs) {
                    const double dev = hexagon_deviation(c, r);
                    worst = std::max(worst, dev);
                    out << "cell " << text::g17(c.site.x) << ' ' << text::g17(c.site.y) << " area "
                        << text::g17(c.area) << " deviation " << text::g17(dev) << '\n';
                    write_polygon(out, c.polygon);
                    if (vor_area) {
                        pieces.push_back(truncate_cell_to_area(c, *vor_area));
                        out << "piece radius " << text::g17(pieces.back().radius) << " area "
                            << text::g17(pieces.back().area) << '\n';
                        write_polygon(out, piece_outline(pieces.back()));
                    }
                }
            });
            std::cerr << "cells: " << cs.size() << " max_deviation: " << text::g17(worst) << '\n';
            if (vor_area) {
                std::cerr << "coverage_gap: " << text::g17(coverage_gap(pieces, p.window())) << '\n';
            }
        } else if (rec->parsed()) {
            SymbolicSequence s;
            Config cfg("recur");
            if (!rec_file.empty()) {
                std::ifstream in(rec_file);
                if (!in) {
                    throw IoError("cannot open '" + rec_file + "'");
                }
                s = read_sequence(in);
                cfg.add("file", rec_file);
            } else {
                const std::size_t n = rec_tm > 0 ? rec_tm : std::max<std::size_t>(4096, 64 * rec_L);
                s = thue_morse_prefix(n);
                cfg.add("thue_morse", n);
            }
            cfg.add("L", rec_L).echo();
            write_report(std::cout, recurrence_gaps(s, rec_L));
        } else if (lim->parsed()) {
            const Packing host = load_packing(lim_host);
            const Packing pattern = load_packing(lim_pattern);
            Config cfg("limit");
            cfg.add("host", lim_host).add("pattern", lim_pattern).add("r", lim_r).add("eps", lim_eps)
                .add("pitch", 0.5 * lim_eps).echo();
            const auto t = limit_translate_search(host, pattern, lim_r, lim_eps);
            if (t) {
                std::cout << "found: " << text::g17(t->x) << ' ' << text::g17(t->y) << '\n';
            } else {
                std::cout << "found: none\n";
            }
        } else if (ren->parsed()) {
            Config cfg("render");
            std::vector<Packing> keep;
            std::vector<SvgPanel> panels;
            if (ren_figure == 1) {
                const Window w = figure1_window(0.5);
                keep.push_back(figure1_defect(0.5, w));
                keep.push_back(hexagonal(0.5, w));
                cfg.add("figure", 1).add("radius", 0.5).add("width", w.width).add("height", w.height);
                const double gap = 1.0;
                panels.push_back({&keep[0], {-0.5 * (w.width + gap), 0.0}, "defect packing"});
                panels.push_back({&keep[1], {0.5 * (w.width + gap), 0.0}, "hexagonal packing"});
            } else if (ren_figure == 4) {
                cfg.add("figure", 4).add("k", ren_k);
                const Window w = string_of_squares_window(ren_k);
                for (int k = 1; k <= ren_k; ++k) {
                    keep.push_back(string_of_squares(k, w));
                }
                for (int k = 1; k <= ren_k; ++k) {
                    panels.push_back({&keep[k - 1], {0.0, -3.5 * (k - 1)}, k == ren_k ? "strings of squares" : ""});
                }
            } else {
                if (ren_in.empty()) {
                    fail(ErrorKind::invalid_argument, "render needs a packing file or --figure");
                }
                keep.push_back(load_packing(ren_in));
                cfg.add("packing", ren_in);
                panels.push_back({&keep[0], {}, ""});
            }
            cfg.echo();
            write_output(ren_out, [&](std::ostream& out) { write_svg(out, panels); });
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::io_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return Exit::internal;
    }
    return Exit::ok;
}
