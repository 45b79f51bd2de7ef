#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sobext/analysis.hpp"
#include "sobext/extension3d.hpp"
#include "sobext/geodesic.hpp"
#include "sobext/injectivizer.hpp"
#include "sobext/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sobext;

namespace {

enum exit_code { ok = 0, config_failure = 1, inconclusive = 2, construction_failure = 3 };

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int max_extension_levels = 6;

json defaults(const std::string& command) {
    json c{{"command", command},
           {"map", {{"type", "identity"}}},
           {"levels", command == "extend" ? 4 : 8},
           {"p", 2.0},
           {"q", json::array({3.0})},
           {"seed", 42},
           {"strict", false},
           {"threads", 0},
           {"out", "sobext_out"}};
    if (command == "energy") {
        c["kinds"] = json::array({"diam", "length"});
        c["good_grids"] = false;
        c["seminorm_budget"] = 2'000'000;
    } else if (command == "extend") {
        c["q"] = json::array({2.0});
        c["resolution"] = 8;
        c["sample_resolution"] = 8;
        c["obj_slices"] = 5;
        c["injectivity_points"] = 33;
        c["injectivity_slices"] = 17;
        c["injectivizer_pairs"] = 200;
        c["arm_samples"] = 32;
    } else if (command == "geodesic") {
        c["polygon"] = json::array({json{0, 0}, json{2, 0}, json{2, 1}, json{1, 1}, json{1, 2}, json{0, 2}});
        c["from"] = {1.8, 0.2};
        c["to"] = {0.2, 1.8};
        c["foliation"] = 0;
    } else if (command == "verify") {
        c["polygons"] = 100;
        c["levels"] = 2;
    }
    return c;
}

void merge(json& base, const json& over) {
    for (auto& [k, v] : over.items()) base[k] = v;
}

Point2 point_of(const json& j) {
    if (!j.is_array() || j.size() != 2) throw config_error("expected a point [x, y], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> q_values(const json& c) {
    std::vector<double> qs;
    if (c["q"].is_number()) qs.push_back(c["q"].get<double>());
    else
        for (auto& v : c["q"]) qs.push_back(v.get<double>());
    if (qs.empty()) throw config_error("q: at least one exponent required");
    return qs;
}

MapPtr map_of(const json& c) {
    try {
        return make_map(c.at("map"));
    } catch (const std::exception& e) {
        throw config_error(std::string("map: ") + e.what());
    }
}

void validate(const json& c) {
    const std::string cmd = c["command"];
    int levels = c["levels"].get<int>();
    if (levels < 1) throw config_error("levels must be >= 1");
    if (cmd == "extend" && levels > max_extension_levels)
        throw config_error("levels must be <= " + std::to_string(max_extension_levels) + " for extend");
    if (!(c["p"].get<double>() > 0)) throw config_error("p must be positive");
    for (double q : q_values(c))
        if (!(q >= 1)) throw config_error("q must be >= 1");
    if (c["threads"].get<int>() < 0) throw config_error("threads must be >= 0");
    if (cmd == "extend") {
        if (c["resolution"].get<int>() < 8) throw config_error("resolution must be >= 8");
        if (c["sample_resolution"].get<int>() < 1) throw config_error("sample_resolution must be >= 1");
        if (c["injectivity_points"].get<int>() < 2) throw config_error("injectivity_points must be >= 2");
    }
    if (cmd == "energy")
        for (auto& k : c["kinds"]) {
            std::string s = k;
            if (s != "diam" && s != "length" && s != "gagliardo") throw config_error("unknown energy kind: " + s);
        }
    map_of(c);
}

fs::path out_dir(const json& c) {
    fs::path p = c["out"].get<std::string>();
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- svg

struct Svg {
    double x0, y0, x1, y1;
    std::ostringstream body;

    explicit Svg(const std::vector<Point2>& extent) {
        x0 = y0 = std::numeric_limits<double>::infinity();
        x1 = y1 = -x0;
        for (auto& p : extent) {
            x0 = std::min(x0, p.x), y0 = std::min(y0, p.y);
            x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
        }
        double pad = 0.05 * std::max(x1 - x0, y1 - y0) + 1e-9;
        x0 -= pad, y0 -= pad, x1 += pad, y1 += pad;
    }
    double sx(double x) const { return 500 * (x - x0) / std::max(x1 - x0, y1 - y0); }
    double sy(double y) const { return 500 * (y1 - y) / std::max(x1 - x0, y1 - y0); }
    void poly(const std::vector<Point2>& pts, bool closed, const std::string& style) {
        body << (closed ? "<polygon" : "<polyline") << " points=\"";
        for (auto& p : pts) body << sx(p.x) << ',' << sy(p.y) << ' ';
        body << "\" style=\"" << style << "\"/>\n";
    }
    void dot(Point2 p, const std::string& fill) {
        body << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"4\" fill=\"" << fill << "\"/>\n";
    }
    std::string str() const {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n"
           << body.str() << "</svg>\n";
        return os.str();
    }
};

// ---------------------------------------------------------------- commands

bool any_inconclusive(const std::vector<EnergyReport>& rs) {
    for (auto& r : rs)
        if (r.verdict == Verdict::inconclusive) return true;
    return false;
}

std::string report_rows(const EnergyReport& r) {
    std::ostringstream os;
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        os << r.kind << ',' << num(r.q) << ',' << r.levels[i] << ',' << num(r.terms[i]) << ','
           << num(r.cumulative[i]) << ',';
        if (i > 0 && r.terms[i] > 0 && r.terms[i - 1] > 0) os << num(std::log2(r.terms[i] / r.terms[i - 1]));
        os << '\n';
    }
    return os.str();
}

int cmd_energy(const json& c) {
    auto phi = map_of(c);
    int K = c["levels"];
    auto dir = out_dir(c);
    std::vector<GoodGrid> grids;
    if (c["good_grids"].get<bool>()) grids = good_grid_family(*phi, c["p"].get<double>(), K);
    std::vector<EnergyReport> reports;
    json seminorms = json::array();
    for (double q : q_values(c))
        for (auto& kind : c["kinds"]) {
            if (kind == "diam") reports.push_back(diam_sum(*phi, q, K));
            if (kind == "length") reports.push_back(length_sum(*phi, q, K, grids));
            if (kind == "gagliardo") {
                SeminormOptions opt;
                opt.seed = c["seed"].get<unsigned long long>();
                opt.budget = c["seminorm_budget"].get<long long>();
                auto est = gagliardo(*phi, q, opt);
                seminorms.push_back(est.to_json());
                if (!est.levels.terms.empty()) {
                    auto r = est.levels;
                    r.kind = "gagliardo";
                    reports.push_back(r);
                }
            }
        }
    std::string csv = "kind,q,level,term,cumulative,slope\n";
    json js{{"config", c}, {"reports", json::array()}, {"seminorms", seminorms}};
    for (auto& r : reports) {
        csv += report_rows(r);
        js["reports"].push_back(r.to_json());
        std::cout << r.kind << " q=" << r.q << " total=" << num(r.cumulative.back()) << " slope=" << r.slope
                  << " verdict=" << to_string(r.verdict) << '\n';
    }
    write_file(dir / "energy.csv", csv);
    write_file(dir / "energy.json", js.dump(2));
    return c["strict"].get<bool>() && any_inconclusive(reports) ? inconclusive : ok;
}

int cmd_extend(const json& c) {
    auto phi = map_of(c);
    auto dir = out_dir(c);
    ExtensionOptions opt;
    opt.levels = c["levels"];
    opt.p = c["p"];
    opt.arm_samples = c["arm_samples"];
    std::unique_ptr<ExtensionField> built;
    try {
        built = std::make_unique<ExtensionField>(phi, opt);
    } catch (const cell_error& e) {
        std::cerr << "construction failed: " << e.what() << '\n';
        return construction_failure;
    } catch (const geometry_error& e) {
        std::cerr << "construction failed: " << e.what() << '\n';
        return construction_failure;
    }
    auto& h = *built;
    write_file(dir / "extension.obj", export_obj(h, c["obj_slices"]));
    write_file(dir / "field.json", sample_json(h, c["sample_resolution"]).dump());

    std::string goal = "k,j,lipschitz,own,with_neighbors,ratio,ratio_own\n";
    int res = c["resolution"];
    double worst_ratio = 0;
    for (int k = 1; k <= h.levels(); ++k)
        for (int j = 0; j < h.cell_count(k); ++j) {
            auto g = goal_check(h, k, j, res);
            worst_ratio = std::max(worst_ratio, g.ratio);
            goal += std::to_string(k) + ',' + std::to_string(j) + ',' + num(g.lipschitz) + ',' + num(g.own) + ',' +
                    num(g.with_neighbors) + ',' + num(g.ratio) + ',' + num(g.ratio_own) + '\n';
        }
    write_file(dir / "goal.csv", goal);

    // energy of the extension next to the boundary terms of the grids it was built on
    std::vector<GoodGrid> grids;
    for (int k = 1; k <= h.levels(); ++k) grids.push_back(h.pl_grids()[static_cast<std::size_t>(k - 1)].grid);
    std::string energy = "q,level,extension_energy,boundary_term\n";
    json ej = json::array();
    for (double q : q_values(c)) {
        auto e = energy_estimate(h, q, res);
        auto b = length_sum(*phi, q, h.levels(), grids);
        for (int k = 1; k <= h.levels(); ++k)
            energy += num(q) + ',' + std::to_string(k) + ',' + num(e.per_level[static_cast<std::size_t>(k - 1)]) +
                      ',' + num(b.terms[static_cast<std::size_t>(k - 1)]) + '\n';
        auto ej1 = e.to_json();
        ej1["boundary"] = b.to_json();
        ej.push_back(ej1);
    }
    write_file(dir / "energy.csv", energy);
    write_file(dir / "energy.json", ej.dump(2));

    json inj{{"points_per_slice", c["injectivity_points"].get<int>() * c["injectivity_points"].get<int>()},
             {"slices_per_cell", c["injectivity_slices"]},
             {"cells", json::array()}};
    int collisions = 0;
    for (int k = 1; k <= h.levels(); ++k)
        for (int j = 0; j < h.cell_count(k); ++j) {
            auto r = slice_injectivity(h, k, j, c["injectivity_points"], c["injectivity_slices"]);
            collisions += r.collisions;
            inj["cells"].push_back({{"k", k},
                                    {"j", j},
                                    {"collisions", r.collisions},
                                    {"min_separation", r.min_separation},
                                    {"worst_t", r.worst_t}});
        }
    inj["collisions"] = collisions;
    // the injectivizer on the top slice of the first cell
    ShortestCurveExtension top(h.cell(1, 0).data().phi_top);
    auto modified = modify_curves(top);
    auto rep = verify_injective(modified.modified(), modified.region(), c["injectivizer_pairs"],
                                c["seed"].get<std::uint64_t>());
    inj["injectivizer"] = rep.to_json();
    inj["clean"] = collisions == 0 && rep.clean();
    write_file(dir / "injectivity.json", inj.dump(2));

    std::cout << "cells " << [&] {
        int n = 0;
        for (int k = 1; k <= h.levels(); ++k) n += h.cell_count(k);
        return n;
    }() << ", worst goal ratio " << num(worst_ratio) << ", injectivity " << (inj["clean"].get<bool>() ? "clean" : "VIOLATED")
              << '\n';
    return c["strict"].get<bool>() && !inj["clean"].get<bool>() ? inconclusive : ok;
}

int cmd_geodesic(const json& c) {
    auto dir = out_dir(c);
    std::vector<Point2> ring;
    for (auto& p : c["polygon"]) ring.push_back(point_of(p));
    JordanPolygon poly;
    try {
        poly = make_polygon(ring);
    } catch (const std::exception& e) {
        throw config_error(std::string("polygon: ") + e.what());
    }
    Point2 a = point_of(c["from"]), b = point_of(c["to"]);
    if (point_in_polygon(poly, a) < 0 || point_in_polygon(poly, b) < 0)
        throw config_error("geodesic endpoints must lie in the closed polygon");
    auto path = shortest_path(poly, a, b);
    Svg svg(poly.vertices);
    svg.poly(poly.vertices, true, "fill:#eef;stroke:#336;stroke-width:1.5");
    svg.poly(path, false, "fill:none;stroke:#c30;stroke-width:2.5");
    svg.dot(a, "#090");
    svg.dot(b, "#900");
    write_file(dir / "geodesic.svg", svg.str());
    json js{{"config", c}, {"length", polyline_length(path)}, {"path", json::array()}};
    for (auto& p : path) js["path"].push_back({p.x, p.y});

    int leaves = c["foliation"];
    if (leaves > 0) {
        auto phi = map_of(c);
        auto bm = SquareBoundaryMap::from_function([&](Point2 x) { return phi->eval(x); }, 16);
        ShortestCurveExtension ext(bm);
        Svg fol(ext.domain().polygon().vertices);
        fol.poly(ext.domain().polygon().vertices, true, "fill:#f6f6f6;stroke:#333;stroke-width:1.5");
        std::vector<PolyLine> curves;
        for (int i = 0; i < leaves; ++i) {
            curves.push_back(ext.leaf(-1 + 2 * (i + 0.5) / leaves));
            fol.poly(curves.back(), false, "fill:none;stroke:#258;stroke-width:1");
        }
        int crossings = 0;
        for (std::size_t i = 0; i < curves.size(); ++i)
            for (std::size_t j = i + 1; j < curves.size(); ++j) crossings += polylines_interior_cross(curves[i], curves[j]);
        write_file(dir / "foliation.svg", fol.str());
        js["foliation"] = {{"curves", leaves}, {"interior_crossings", crossings}};
        std::cout << leaves << " leaves, " << crossings << " interior crossings\n";
    }
    write_file(dir / "geodesic.json", js.dump(2));
    std::cout << "geodesic length " << num(polyline_length(path)) << " with " << path.size() << " vertices\n";
    return ok;
}

const std::vector<std::pair<std::string, json>>& example_maps() {
    static const std::vector<std::pair<std::string, json>> maps{
        {"identity", {{"type", "identity"}}},
        {"affine", {{"type", "affine"}, {"A", {{2, 0.5}, {0, 1}}}, {"b", {0, 0}}}},
        {"smooth", {{"type", "smooth"}, {"amplitude", 0.1}}},
        {"radial", {{"type", "radial"}, {"alpha", 0.5}}},
        {"cantor", {{"type", "cantor"}, {"k", 3}}},
        {"saw", {{"type", "saw"}, {"J", 1}, {"q", 2.0}}}};
    return maps;
}

int cmd_examples(const json& c) {
    auto dir = out_dir(c);
    fs::create_directories(dir / "examples");
    int K = c["levels"];
    std::string csv = "example,q,kind,total,slope,verdict\n";
    for (auto& [name, spec] : example_maps()) {
        json cfg = defaults("energy");
        cfg["map"] = spec;
        cfg["levels"] = K;
        cfg["q"] = c["q"];
        cfg["out"] = (dir / "examples" / name).string();
        write_file(dir / "examples" / (name + ".json"), cfg.dump(2));
        auto phi = make_map(spec);
        for (double q : q_values(c)) {
            for (auto r : {diam_sum(*phi, q, K), length_sum(*phi, q, K)}) {
                csv += name + ',' + num(q) + ',' + r.kind + ',' + num(r.cumulative.back()) + ',' + num(r.slope) + ',' +
                       to_string(r.verdict) + '\n';
            }
        }
        std::cout << name << ": " << spec.dump() << '\n';
    }
    write_file(dir / "examples.csv", csv);
    return ok;
}

int cmd_verify(const json& c) {
    auto dir = out_dir(c);
    std::mt19937_64 rng(c["seed"].get<std::uint64_t>());
    json checks = json::array();
    bool all = true;
    auto record = [&](const std::string& name, bool pass, json detail) {
        all = all && pass;
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        std::cout << (pass ? "PASS " : "FAIL ") << name << ' ' << detail.dump() << '\n';
    };

    int n = c["polygons"], mismatches = 0;
    for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<int> size(3, 30);
        auto poly = random_star_polygon(rng, size(rng));
        std::uniform_real_distribution<double> u(-1, 1);
        Point2 a, b;
        do a = {u(rng), u(rng)};
        while (point_in_polygon(poly, a) <= 0);
        do b = {u(rng), u(rng)};
        while (point_in_polygon(poly, b) <= 0);
        auto f = shortest_path(poly, a, b), o = shortest_path_oracle(poly, a, b);
        if (std::abs(polyline_length(f) - polyline_length(o)) > 1e-9 || simplify_path(f) != simplify_path(o))
            ++mismatches;
    }
    record("geodesic_oracle", mismatches == 0, {{"polygons", n}, {"mismatches", mismatches}});

    IdentityMap id;
    double d = diam_sum(id, 3, 10).cumulative.back(), want = std::pow(2, 1.5) * (1 - std::ldexp(1.0, -10));
    record("identity_diam_sum", std::abs(d - want) <= 1e-6, {{"value", d}, {"expected", want}});

    auto phi = map_of(c);
    ExtensionOptions opt;
    opt.levels = c["levels"];
    try {
        ExtensionField h(phi, opt);
        std::uniform_real_distribution<double> u(0, 1);
        double face = 0;
        bool planes = true;
        for (int i = 0; i < 100; ++i) {
            int k = 1 + i % std::max(1, h.levels() - 1);
            if (k >= h.levels()) break;
            double x = u(rng), y = u(rng);
            auto cell = CubeCell::make(k, h.locate(k, x, y));
            auto p = h.eval_cell(k, cell.j, x, y, cell.bot);
            auto q = h.eval_cell(k + 1, h.locate(k + 1, x, y), x, y, cell.bot);
            face = std::max(face, std::hypot(p.x - q.x, p.y - q.y));
            double t = h.min_t() + (1 - h.min_t()) * u(rng);
            planes = planes && h.eval(x, y, t).z == t;
        }
        record("extension_faces", face <= 1e-9, {{"max_gap", face}});
        record("horizontal_planes", planes, json::object());
    } catch (const geometry_error& e) {
        record("extension_build", false, {{"error", e.what()}});
    }
    write_file(dir / "verify.json", json{{"config", c}, {"checks", checks}, {"pass", all}}.dump(2));
    return all ? ok : inconclusive;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sobolev boundary extension toolkit"};
    app.require_subcommand(1);
    std::string config_path, map_type, map_json, map_file, out;
    double alpha = 0, cantor_k = 0, saw_j = 0, saw_q = 0, amplitude = 0, p = 0;
    int levels = 0, seed = 0, threads = 0, resolution = 0, foliation = 0, polygons = 0;
    std::vector<double> q;
    std::vector<std::string> kinds;
    std::string polygon, from, to;
    bool strict = false, good_grids = false;

    std::map<std::string, CLI::App*> subs;
    for (std::string name : {"energy", "extend", "geodesic", "examples", "verify"}) {
        auto* s = app.add_subcommand(name);
        subs[name] = s;
        s->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        s->add_option("--map", map_type, "boundary map type");
        s->add_option("--map-json", map_json, "boundary map as inline JSON");
        s->add_option("--map-file", map_file, "sampled map JSON file");
        s->add_option("--alpha", alpha, "radial exponent");
        s->add_option("--k", cantor_k, "Cantor ratio");
        s->add_option("--J", saw_j, "saw truncation");
        s->add_option("--saw-q", saw_q, "saw growth exponent");
        s->add_option("--amplitude", amplitude, "smooth map amplitude");
        s->add_option("--levels", levels, "dyadic levels K");
        s->add_option("--p", p, "grid selection exponent");
        s->add_option("--q", q, "energy exponents")->delimiter(',');
        s->add_option("--seed", seed, "seed for randomized checks");
        s->add_option("--threads", threads, "worker threads (0: SOBEXT_THREADS or hardware)");
        s->add_option("--out", out, "output directory");
        s->add_flag("--strict", strict, "exit 2 on inconclusive results");
    }
    subs["energy"]->add_option("--kinds", kinds, "diam, length, gagliardo")->delimiter(',');
    subs["energy"]->add_flag("--good-grids", good_grids, "length sums over the selected good grids");
    subs["extend"]->add_option("--resolution", resolution, "energy and goal lattice per cell edge");
    subs["geodesic"]->add_option("--polygon", polygon, "x,y;x,y;...");
    subs["geodesic"]->add_option("--from", from, "x,y");
    subs["geodesic"]->add_option("--to", to, "x,y");
    subs["geodesic"]->add_option("--foliation", foliation, "leaves of the extension of --map to draw");
    subs["verify"]->add_option("--polygons", polygons, "random polygons for the geodesic oracle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    std::string command;
    CLI::App* sub = nullptr;
    for (auto& [name, s] : subs)
        if (s->parsed()) command = name, sub = s;
    auto given = [&](const std::string& flag) { return sub->count(flag) > 0; };

    json c;
    try {
        c = defaults(command);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            json file = json::parse(in);
            file.erase("command");
            merge(c, file);
        }
        if (given("--map")) c["map"] = {{"type", map_type}};
        if (given("--map-json")) c["map"] = json::parse(map_json);
        if (given("--map-file")) c["map"] = {{"type", "sampled"}, {"file", map_file}};
        if (given("--alpha")) c["map"]["alpha"] = alpha;
        if (given("--k")) c["map"]["k"] = static_cast<int>(cantor_k);
        if (given("--J")) c["map"]["J"] = static_cast<int>(saw_j);
        if (given("--saw-q")) c["map"]["q"] = saw_q;
        if (given("--amplitude")) c["map"]["amplitude"] = amplitude;
        if (given("--levels")) c["levels"] = levels;
        if (given("--p")) c["p"] = p;
        if (given("--q")) c["q"] = q;
        if (given("--seed")) c["seed"] = seed;
        if (given("--threads")) c["threads"] = threads;
        if (given("--out")) c["out"] = out;
        if (given("--strict")) c["strict"] = strict;
        if (command == "energy" && given("--kinds")) c["kinds"] = kinds;
        if (command == "energy" && given("--good-grids")) c["good_grids"] = good_grids;
        if (command == "extend" && given("--resolution")) c["resolution"] = resolution;
        if (command == "verify" && given("--polygons")) c["polygons"] = polygons;
        if (command == "geodesic") {
            auto pt = [](const std::string& s) {
                double x, y;
                char comma;
                std::istringstream is(s);
                if (!(is >> x >> comma >> y) || comma != ',') throw config_error("bad point: " + s);
                return json{x, y};
            };
            if (given("--polygon")) {
                json ring = json::array();
                std::stringstream ss(polygon);
                std::string item;
                while (std::getline(ss, item, ';'))
                    if (!item.empty()) ring.push_back(pt(item));
                c["polygon"] = ring;
            }
            if (given("--from")) c["from"] = pt(from);
            if (given("--to")) c["to"] = pt(to);
            if (given("--foliation")) c["foliation"] = foliation;
        }
        validate(c);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    }

    if (c["threads"].get<int>() > 0) set_thread_count(c["threads"].get<int>());
    try {
        auto dir = out_dir(c);
        write_file(dir / "config.json", c.dump(2));
        if (command == "energy") return cmd_energy(c);
        if (command == "extend") return cmd_extend(c);
        if (command == "geodesic") return cmd_geodesic(c);
        if (command == "examples") return cmd_examples(c);
        return cmd_verify(c);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_failure;
    } catch (const geometry_error& e) {
        std::cerr << "construction failed: " << e.what() << '\n';
        return construction_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return construction_failure;
    }
}
