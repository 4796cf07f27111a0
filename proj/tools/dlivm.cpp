// Command-line front end: materialise, update, generate, bench, verify.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dlivm/dlivm.hpp"

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw dlivm::Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFile(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw dlivm::Error("cannot write " + path);
    out << text;
}

dlivm::LoadedInstance loadFiles(const std::string& progPath, const std::string& factsPath) {
    dlivm::LoadedInstance inst;
    inst.voc = std::make_shared<dlivm::Vocabulary>();
    inst.program = dlivm::analyze(inst.voc, dlivm::parseProgram(*inst.voc, readFile(progPath)));
    inst.facts = dlivm::parseFacts(*inst.voc, readFile(factsPath));
    return inst;
}

std::string dumpFacts(const dlivm::EngineState& state) {
    std::string out;
    for (const std::string& line : dlivm::renderSortedFacts(state))
        out += line + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stratified-datalog materialisation and incremental maintenance"};
    app.require_subcommand(1);

    // mat
    auto* mat = app.add_subcommand("mat", "materialise a program over explicit facts");
    std::string matProg, matData, matDump, matCounters = "both";
    mat->add_option("prog", matProg, "program (.dl)")->required();
    mat->add_option("data", matData, "explicit facts (.facts)")->required();
    mat->add_option("--dump", matDump, "write the materialisation, sorted, to this file");
    mat->add_option("--counters", matCounters, "derivation counters to maintain")
        ->check(CLI::IsMember({"none", "nr", "both"}));

    // update
    auto* upd = app.add_subcommand("update", "apply a delta incrementally");
    std::string updProg, updData, updDelta, updAlgo, updStats, updDump;
    bool updVerify = false;
    upd->add_option("prog", updProg, "program (.dl)")->required();
    upd->add_option("data", updData, "explicit facts (.facts)")->required();
    upd->add_option("delta", updDelta, "update (.delta)")->required();
    upd->add_option("--algo", updAlgo, "maintenance algorithm")
        ->required()
        ->check(CLI::IsMember({"dred", "dredc", "bf", "bfc"}));
    upd->add_option("--stats", updStats, "write per-phase statistics CSV to this file");
    upd->add_option("--dump", updDump, "write the updated materialisation to this file");
    upd->add_flag("--verify", updVerify, "compare against rematerialisation from scratch");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a benchmark instance");
    std::string genKind, genOut = ".";
    std::uint64_t genSeed = 0, genEdges = 10000;
    std::uint32_t genN = 100, genNodes = 1000;
    bool genVaried = false;
    dlivm::RandomSpec randomSpec;
    gen->add_option("kind", genKind, "generator")
        ->required()
        ->check(CLI::IsMember({"ex1", "ex2", "ex3", "sspe", "random"}));
    gen->add_option("--seed", genSeed, "random seed");
    gen->add_option("--out", genOut, "output directory")->required();
    gen->add_option("--n", genN, "size parameter for ex1/ex2");
    gen->add_option("--nodes", genNodes, "node count for sspe");
    gen->add_option("--edges", genEdges, "edge count for sspe");
    gen->add_flag("--varied-lengths", genVaried, "sspe: draw edge lengths from 1..5 instead of 1");
    gen->add_option("--rules", randomSpec.rules, "random: rule count");
    gen->add_option("--predicates", randomSpec.predicates, "random: predicate count");
    gen->add_option("--constants", randomSpec.constants, "random: constant count");
    gen->add_option("--facts", randomSpec.facts, "random: fact count");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark suite");
    std::string benchSuite, benchOut;
    bench->add_option("--suite", benchSuite, "suite")
        ->required()
        ->check(CLI::IsMember({"scaling", "fuzz"}));
    bench->add_option("--out", benchOut, "report CSV path")->required();

    // verify
    auto* ver = app.add_subcommand("verify", "check an updated materialisation against scratch");
    std::string verProg, verData, verDelta, verResult;
    ver->add_option("prog", verProg, "program (.dl)")->required();
    ver->add_option("data", verData, "pre-update explicit facts (.facts)")->required();
    ver->add_option("delta", verDelta, "update (.delta)")->required();
    ver->add_option("result", verResult, "claimed post-update materialisation (.facts)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*mat) {
            dlivm::LoadedInstance inst = loadFiles(matProg, matData);
            dlivm::CounterMode mode = matCounters == "none" ? dlivm::CounterMode::None
                                      : matCounters == "nr" ? dlivm::CounterMode::NonrecursiveOnly
                                                            : dlivm::CounterMode::Both;
            dlivm::EngineState state = dlivm::materialise(inst.program, inst.facts, mode);
            std::cout << "facts " << state.facts.size() << "\n";
            if (!matDump.empty())
                writeFile(matDump, dumpFacts(state));
        } else if (*upd) {
            dlivm::LoadedInstance inst = loadFiles(updProg, updData);
            dlivm::ParsedDelta delta = dlivm::parseDelta(*inst.voc, readFile(updDelta));
            dlivm::Algo algo = *dlivm::algoFromName(updAlgo);
            bool counted = algo == dlivm::Algo::Dred || algo == dlivm::Algo::Dredc;
            dlivm::EngineState state = dlivm::materialise(
                inst.program, inst.facts,
                counted ? dlivm::CounterMode::Both : dlivm::CounterMode::NonrecursiveOnly);
            dlivm::UpdateStats stats = dlivm::applyUpdate(state, algo, delta);
            std::cout << "facts " << state.facts.size() << "\n";
            if (!updStats.empty())
                writeFile(updStats, stats.csv());
            if (!updDump.empty())
                writeFile(updDump, dumpFacts(state));
            if (updVerify) {
                dlivm::VerifyReport report = dlivm::verifyUpdate(
                    state, inst.facts, delta, /*checkCnr=*/true,
                    /*checkCr=*/algo == dlivm::Algo::Dredc);
                std::cout << report.summary() << "\n";
                if (!report.pass)
                    return 2;
            }
        } else if (*gen) {
            dlivm::GeneratedInstance instance;
            if (genKind == "ex1") {
                instance = dlivm::genExample1(genN);
            } else if (genKind == "ex2") {
                instance = dlivm::genExample2(genN);
            } else if (genKind == "ex3") {
                instance = dlivm::genExample3();
            } else if (genKind == "sspe") {
                instance = dlivm::genSspe(genNodes, genEdges, genSeed, genVaried);
            } else {
                randomSpec.seed = genSeed;
                instance = dlivm::genRandom(randomSpec);
            }
            std::filesystem::create_directories(genOut);
            writeFile(genOut + "/prog.dl", instance.program);
            writeFile(genOut + "/data.facts", instance.facts);
            std::cout << "wrote " << genOut << "/prog.dl and " << genOut << "/data.facts\n";
        } else if (*bench) {
            std::string csv = benchSuite == "scaling" ? dlivm::benchScaling() : dlivm::benchFuzz();
            writeFile(benchOut, csv);
            std::cout << "wrote " << benchOut << "\n";
        } else if (*ver) {
            dlivm::LoadedInstance inst = loadFiles(verProg, verData);
            dlivm::ParsedDelta delta = dlivm::parseDelta(*inst.voc, readFile(verDelta));
            std::vector<dlivm::GroundFact> claimed =
                dlivm::parseFacts(*inst.voc, readFile(verResult));

            std::unordered_set<dlivm::GroundFact, dlivm::GroundFactHash> newE(inst.facts.begin(),
                                                                              inst.facts.end());
            for (const dlivm::GroundFact& f : delta.deletions)
                newE.erase(f);
            for (const dlivm::GroundFact& f : delta.insertions)
                newE.insert(f);
            dlivm::EngineState oracle = dlivm::materialise(
                inst.program, {newE.begin(), newE.end()}, dlivm::CounterMode::None);

            std::unordered_set<dlivm::GroundFact, dlivm::GroundFactHash> claimedSet(
                claimed.begin(), claimed.end());
            bool pass = claimedSet.size() == oracle.facts.size();
            oracle.facts.forEachLive([&](dlivm::FactId id) {
                if (!claimedSet.count(oracle.registry.fact(id)))
                    pass = false;
            });
            std::cout << (pass ? "PASS" : "FAIL") << "\n";
            if (!pass)
                return 2;
        }
    } catch (const dlivm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
