// Batch driver. Every subcommand assembles its whole output in memory,
// headed by an echo of the effective configuration, so a failed run emits
// nothing and a quoted number always carries its truncation context.

#include "CLI11.hpp"

#include <treedim/dimension.hpp>
#include <treedim/group_catalog.hpp>
#include <treedim/group_engine.hpp>
#include <treedim/lifting.hpp>
#include <treedim/matrix_ring.hpp>
#include <treedim/ncgraph.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace {

struct Options {
    std::string group;
    std::size_t depth = 0;
    std::size_t max_depth = 12;
    std::size_t level = 1;
    std::size_t pairs = 1;
    std::size_t bound = 8;
    std::size_t levels = 1;
    std::size_t margin = 2;
    std::size_t sum = 8;
    std::string mode = "weakly_branch";
    std::string format = "table";
    std::string file;
    std::int64_t prime = 2;
    std::size_t degree = 2;
    std::size_t budget = 10000;
    std::string out;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw treedim::io_error("cannot read file " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw treedim::io_error("cannot open output file " + out_path);
    f << text;
    f.flush();
    if (!f.good()) throw treedim::io_error("cannot write output file " + out_path);
}

// a group source is a catalog name, or a path to an automaton file; anything
// containing a separator or a dot is treated as a path
treedim::AutomatonGroup load_group(const std::string& source) {
    bool pathlike = source.find('/') != std::string::npos ||
                    source.find('.') != std::string::npos;
    if (pathlike || std::filesystem::exists(std::filesystem::path(source))) {
        std::string text = read_file(source);
        try {
            return treedim::AutomatonGroup::parse(text);
        } catch (const treedim::precondition_error& e) {
            throw treedim::io_error("automaton file " + source + ": " + e.what());
        }
    }
    return treedim::catalog(source);
}

// keeps truncations desk-sized before any portrait is unfolded
void guard_depth(std::size_t depth, std::size_t max_depth, int arity) {
    treedim::require(depth >= 1, "depth guard: depth must be at least 1");
    treedim::require(depth <= max_depth,
                     "depth guard: depth " + std::to_string(depth) + " exceeds the maximum " +
                         std::to_string(max_depth) + " (raise --max-depth to override)");
    std::size_t leaves = 1;
    for (std::size_t i = 0; i < depth; ++i) {
        leaves *= static_cast<std::size_t>(arity);
        treedim::require(leaves <= 8192, "depth guard: leaf budget 8192 exceeded");
    }
}

treedim::TreeGroup load_tree_group(const Options& o) {
    treedim::AutomatonGroup a = load_group(o.group);
    guard_depth(o.depth, o.max_depth, a.arity());
    return a.unfold(o.depth);
}

std::string word_text(const treedim::Word& w) {
    if (w.empty()) return "ε";
    std::string s;
    for (int d : w) s += static_cast<char>('0' + d);
    return s;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

void run_dim(const Options& o) {
    treedim::DimensionProfile prof =
        treedim::dimension_profile(load_tree_group(o), o.depth, o.group);
    std::ostringstream os;
    os << "command: dim\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "format: " << o.format << "\n\n";
    if (o.format == "table") {
        os << prof.to_csv();
    } else {
        for (const treedim::LevelRecord& r : prof.records) {
            os << "record: level\n"
               << "n: " << r.n << "\n"
               << "log_num: " << r.log_num.to_string() << "\n"
               << "log_den: " << r.log_den.to_string() << "\n"
               << "ratio: " << r.ratio.to_string() << "\n\n";
        }
        os << "record: window\n"
           << "shape: " << prof.shape.to_string() << "\n"
           << "levels: " << prof.records.size() << "\n"
           << "window_levels: " << prof.window.levels << "\n"
           << "window_min: " << prof.window.min.to_string() << "\n"
           << "window_max: " << prof.window.max.to_string() << "\n"
           << "window_last: " << prof.window.last.to_string() << "\n";
    }
    emit(o.out, os.str());
}

void run_rist(const Options& o) {
    treedim::TreeGroupEngine eng(load_tree_group(o));
    std::vector<treedim::RigidStabilizer> rists = eng.rigid_level_stabilizer(o.level);
    std::ostringstream os;
    os << "command: rist\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "level: " << o.level << "\n\n";
    for (const treedim::RigidStabilizer& r : rists) {
        os << "vertex: " << word_text(r.vertex) << "\n"
           << "generators: " << r.generators.size() << "\n"
           << "trivial: " << yes_no(r.trivial()) << "\n"
           << "order: " << r.action.order().to_string() << "\n\n";
    }
    emit(o.out, os.str());
}

void run_evidence(const Options& o) {
    treedim::TreeGroupEngine eng(load_tree_group(o));
    treedim::WeaklyBranchReport rep = eng.weakly_branch_evidence(o.levels, o.margin);
    std::ostringstream os;
    os << "command: evidence\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "levels: " << o.levels << "\n"
       << "margin: " << o.margin << "\n\n"
       << rep.to_text() << "all_positive: " << yes_no(rep.all_positive()) << "\n";
    emit(o.out, os.str());
}

void run_ineq(const Options& o) {
    treedim::TreeGroup g = load_tree_group(o);
    std::size_t cap = std::min(o.sum, o.depth);
    std::ostringstream os;
    os << "command: ineq\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "sum: " << o.sum << "\n"
       << "format: " << o.format << "\n\n";
    bool all = true;
    if (o.format == "table") os << "k,n,left,right,holds,transitive_level\n";
    for (std::size_t n = 1; n <= cap; ++n) {
        for (std::size_t k = 0; k + n <= cap; ++k) {
            treedim::InequalityCheck c = treedim::check_level_index_inequality(g, k, n);
            all = all && c.holds;
            if (o.format == "table") {
                os << c.k << ',' << c.n << ',' << c.left.to_string() << ','
                   << c.right.to_string() << ',' << yes_no(c.holds) << ','
                   << yes_no(c.transitive_level) << "\n";
            } else {
                os << "record: check\n"
                   << "k: " << c.k << "\n"
                   << "n: " << c.n << "\n"
                   << "left: " << c.left.to_string() << "\n"
                   << "right: " << c.right.to_string() << "\n"
                   << "holds: " << yes_no(c.holds) << "\n"
                   << "transitive_level: " << yes_no(c.transitive_level) << "\n\n";
            }
        }
    }
    os << "\nall: " << yes_no(all) << "\n";
    emit(o.out, os.str());
}

void run_lift(const Options& o) {
    treedim::TreeLifting tl = treedim::tree_lifting(load_tree_group(o), o.level);
    std::ostringstream os;
    os << "command: lift\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "level: " << o.level << "\n\n"
       << "base_vertex: " << word_text(tl.base_vertex) << "\n"
       << "blocks: " << tl.blocked.block_count() << "\n"
       << "subtree_shape: " << tl.subtree_shape.to_string() << "\n"
       << tl.witness.to_text();
    emit(o.out, os.str());
}

void run_ncrep(const Options& o) {
    treedim::TreeGroup g = load_tree_group(o);
    treedim::NCRep<treedim::Portrait> rep =
        o.mode == "weakly_branch"
            ? treedim::construct_vn_weakly_branch(g, o.pairs, o.bound)
            : treedim::construct_vn_via_lifting(g, o.pairs, o.level, o.bound);
    std::ostringstream os;
    os << "command: ncrep\n"
       << "group: " << o.group << "\n"
       << "depth: " << o.depth << "\n"
       << "pairs: " << o.pairs << "\n"
       << "mode: " << o.mode << "\n"
       << "level: " << o.level << "\n"
       << "bound: " << o.bound << "\n\n"
       << treedim::to_text(rep);
    emit(o.out, os.str());
}

void run_matcheck(const Options& o) {
    treedim::MatrixLabelling lab = treedim::parse_matrix_labelling(read_file(o.file));
    std::ostringstream os;
    os << "command: matcheck\n"
       << "file: " << o.file << "\n\n";
    std::visit(
        [&os](const auto& rep) {
            bool ok = treedim::verify_pattern(rep);
            os << "pattern: " << (ok ? "ok" : "failed") << "\n";
            if (!ok) {
                os << treedim::verify(rep).to_text();
                return;
            }
            std::size_t n = rep.graph.vertex_count() / 2;
            std::decay_t<decltype(rep.labels)> a_side;
            for (std::size_t i = 0; i < n; ++i) a_side.push_back(rep.labels[2 * i]);
            os << "rank: " << treedim::independence_rank(a_side) << "\n"
               << "bound: " << yes_no(treedim::assert_sqrt_bound(rep)) << "\n";
        },
        lab);
    emit(o.out, os.str());
}

void run_maxvn(const Options& o) {
    std::ostringstream os;
    os << "command: maxvn\n"
       << "prime: " << o.prime << "\n"
       << "degree: " << o.degree << "\n"
       << "budget: " << o.budget << "\n\n"
       << "max_vn: " << treedim::exhaustive_max_vn(o.prime, o.degree, o.budget) << "\n";
    emit(o.out, os.str());
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"exact finite-depth computations for groups acting on bounded rooted trees"};
    app.require_subcommand(1);

    auto add_group_opts = [&o](CLI::App* cmd) {
        cmd->add_option("--group", o.group, "catalog name or automaton file")->required();
        cmd->add_option("--depth", o.depth, "truncation depth")->required();
        cmd->add_option("--max-depth", o.max_depth, "depth guard ceiling")
            ->capture_default_str();
        cmd->add_option("--out", o.out, "write the output to this file instead of stdout");
    };

    CLI::App* dim = app.add_subcommand("dim", "per-level dimension profile");
    add_group_opts(dim);
    dim->add_option("--format", o.format, "table or record")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "record"}));
    dim->callback([&o] { run_dim(o); });

    CLI::App* rist = app.add_subcommand("rist", "rigid stabilizers of one vertex level");
    add_group_opts(rist);
    rist->add_option("--level", o.level, "vertex level")->required();
    rist->callback([&o] { run_rist(o); });

    CLI::App* evidence = app.add_subcommand("evidence", "weakly branch evidence per level");
    add_group_opts(evidence);
    evidence->add_option("--levels", o.levels, "deepest level to certify")
        ->capture_default_str();
    evidence->add_option("--margin", o.margin, "extra depth below each certified level")
        ->capture_default_str();
    evidence->callback([&o] { run_evidence(o); });

    CLI::App* ineq = app.add_subcommand("ineq", "level index inequality sweep");
    add_group_opts(ineq);
    ineq->add_option("--sum", o.sum, "sweep all k, n >= 1 with k + n up to this bound")
        ->capture_default_str();
    ineq->add_option("--format", o.format, "table or record")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "record"}));
    ineq->callback([&o] { run_ineq(o); });

    CLI::App* lift = app.add_subcommand("lift", "lifting witness for one level stabilizer");
    add_group_opts(lift);
    lift->add_option("--level", o.level, "level of the stabilizer to lift")
        ->capture_default_str();
    lift->callback([&o] { run_lift(o); });

    CLI::App* ncrep = app.add_subcommand("ncrep", "non-commuting labelling of disjoint edges");
    add_group_opts(ncrep);
    ncrep->add_option("--pairs", o.pairs, "number of disjoint edges")->required();
    ncrep->add_option("--mode", o.mode, "weakly_branch or via_lifting")
        ->capture_default_str()
        ->check(CLI::IsMember({"weakly_branch", "via_lifting"}));
    ncrep->add_option("--level", o.level, "stabilizer level for via_lifting")
        ->capture_default_str();
    ncrep->add_option("--bound", o.bound, "word length search bound")
        ->capture_default_str();
    ncrep->callback([&o] { run_ncrep(o); });

    CLI::App* matcheck = app.add_subcommand("matcheck", "verify a matrix labelling file");
    matcheck->add_option("--file", o.file, "labelling file to check")->required();
    matcheck->add_option("--out", o.out, "write the output to this file instead of stdout");
    matcheck->callback([&o] { run_matcheck(o); });

    CLI::App* maxvn = app.add_subcommand("maxvn", "largest disjoint edge family in a finite GL");
    maxvn->add_option("--prime", o.prime, "field characteristic")->required();
    maxvn->add_option("--degree", o.degree, "matrix degree")->required();
    maxvn->add_option("--budget", o.budget, "largest group order to enumerate")
        ->capture_default_str();
    maxvn->add_option("--out", o.out, "write the output to this file instead of stdout");
    maxvn->callback([&o] { run_maxvn(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const treedim::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
