// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 if any fails.
#include "flow_oracle.hpp"
#include "mock_explorer.hpp"
#include "support.hpp"

#include "rtriage/cli.hpp"
#include "rtriage/corpus.hpp"
#include "rtriage/report.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace rtriage;
using namespace rtriage::test;
namespace fs = std::filesystem;

namespace {

struct Check
{
    bool ok = true;
    std::ostringstream notes;

    void expect(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            notes << (notes.tellp() > 0 ? "; " : "") << what;
        }
    }
};

struct CliRun
{
    int code;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> listing(const fs::path& dir)
{
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

const Verdict* verdict_of(const std::vector<FileReport>& reports, const std::string& file, const std::string& fn)
{
    for (const auto& r : reports)
        if (r.path == file)
            for (const auto& v : r.verdicts)
                if (v.finding.function == fn)
                    return &v;
    return nullptr;
}

bool has_rule(const Verdict& v, CauseType c)
{
    for (const auto& r : v.rule_trace)
        if (r.rule == c)
            return r.matched;
    return false;
}

// 1. Canonical-corpus fidelity.
void canonical_fidelity(Check& c)
{
    auto start = std::chrono::steady_clock::now();
    auto batch = run_batch(discover(canonical_dir()), {}, AnalysisOptions{}, 1);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t findings = 0;
    std::vector<std::string> likely_tp;
    for (const auto& r : batch.reports)
        for (const auto& v : r.verdicts) {
            ++findings;
            if (v.classification == Classification::likely_true_positive)
                likely_tp.push_back(r.path + ":" + v.finding.function);
        }
    c.expect(findings >= 8, "only " + std::to_string(findings) + " findings");
    c.expect(likely_tp == std::vector<std::string>{"simple_dao.sol:withdraw"}, "likely TP set differs");

    const std::vector<std::tuple<std::string, std::string, std::vector<CauseType>>> designated = {
        {"identity_control.sol", "execute", {CauseType::identity_control}},
        {"address_control.sol", "register", {CauseType::address_control}},
        {"reentrancy_lock.sol", "withdraw", {CauseType::reentrancy_lock}},
        {"no_state_change.sol", "getTokenBal", {CauseType::no_state_change}},
        {"no_financial_risk.sol", "depositToken", {CauseType::no_financial_risk}},
        {"special_transfer_value.sol", "tradeEthVsDAI", {CauseType::special_transfer_value}},
        {"transfer_non_callable.sol", "_withdraw", {CauseType::gas_stipend_transfer_send, CauseType::non_callable}},
    };
    for (const auto& [file, fn, causes] : designated) {
        const Verdict* v = verdict_of(batch.reports, file, fn);
        if (!v) {
            c.expect(false, file + " has no finding");
            continue;
        }
        c.expect(v->classification == Classification::suppressed_false_positive, file + " not suppressed");
        for (auto cause : causes)
            c.expect(v->causes.count(cause) && !v->causes.at(cause).empty(), file + " lacks " + to_string(cause));
    }
    c.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s");
    c.notes << (c.ok ? "" : " | ") << findings << " findings, 1 likely TP, " << std::fixed << std::setprecision(3)
            << secs << " s";
}

MetricsReport bench_metrics(const fs::path& dir, const std::set<CauseType>& rules)
{
    AnalysisOptions o;
    o.rules = rules;
    auto labels = load_labels(dir / "labels.csv");
    auto deduped = dedupe(discover(dir));
    return run_batch(deduped.retained, labels, o, 2).metrics;
}

// 2. Precision improvement.
void precision_property(Check& c)
{
    auto on = bench_metrics(canonical_dir(), all_causes());
    auto off = bench_metrics(canonical_dir(), {});
    c.expect(on.tp_count == 1 && on.reported_count == 1, "rules on: " + std::to_string(on.tp_count) + "/" +
                                                             std::to_string(on.reported_count));
    c.expect(off.tp_count == 1 && off.reported_count == 8, "rules off: " + std::to_string(off.tp_count) + "/" +
                                                               std::to_string(off.reported_count));
    std::size_t suppressed_tp = 0;
    for (const auto& dir : {canonical_dir(), mutants_dir()}) {
        auto m_on = bench_metrics(dir, all_causes());
        auto m_off = bench_metrics(dir, {});
        if (m_on.precision && m_off.precision)
            c.expect(*m_on.precision >= *m_off.precision, dir.filename().string() + ": precision decreased");
        for (const auto& o : m_on.records)
            if (o.record.label == Label::tp && !o.reported)
                ++suppressed_tp;
    }
    c.expect(suppressed_tp == 0, std::to_string(suppressed_tp) + " TP records suppressed");
    c.notes << (c.ok ? "" : " | ") << "canonical on " << on.tp_count << "/" << on.reported_count << ", off "
            << off.tp_count << "/" << off.reported_count << ", 0 TP suppressed";
}

// 3. Metamorphic mutants.
void metamorphic(Check& c)
{
    struct Flip
    {
        std::string sample;
        std::string mutant;
        std::string function;
        std::vector<CauseType> rules;
        bool addition;
    };
    const std::vector<Flip> flips = {
        {"identity_control.sol", "m01_no_modifier.sol", "execute", {CauseType::identity_control}, false},
        {"address_control.sol", "m02_mutable_token.sol", "register", {CauseType::address_control}, false},
        {"reentrancy_lock.sol", "m03_no_lock.sol", "withdraw", {CauseType::reentrancy_lock}, false},
        {"no_state_change.sol", "m04_state_change.sol", "getTokenBal", {CauseType::no_state_change}, false},
        {"no_financial_risk.sol", "m05_guarded_balance.sol", "depositToken", {CauseType::no_financial_risk},
         false},
        {"special_transfer_value.sol", "m06_param_value.sol", "tradeEthVsDAI",
         {CauseType::special_transfer_value}, false},
        {"transfer_non_callable.sol", "m07_call_value.sol", "_withdraw",
         {CauseType::gas_stipend_transfer_send}, false},
        {"transfer_non_callable.sol", "m08_public.sol", "_withdraw", {CauseType::non_callable}, false},
        {"transfer_non_callable.sol", "m17_public_call.sol", "_withdraw",
         {CauseType::gas_stipend_transfer_send, CauseType::non_callable}, false},
        {"simple_dao.sol", "m09_only_owner.sol", "withdraw", {CauseType::identity_control}, true},
        {"simple_dao.sol", "m10_fixed_target.sol", "withdraw", {CauseType::address_control}, true},
        {"simple_dao.sol", "m11_lock.sol", "withdraw", {CauseType::reentrancy_lock}, true},
        {"simple_dao.sol", "m13_msg_value.sol", "withdraw", {CauseType::special_transfer_value}, true},
        {"simple_dao.sol", "m14_transfer.sol", "withdraw", {CauseType::gas_stipend_transfer_send}, true},
        {"simple_dao.sol", "m15_internal.sol", "withdraw", {CauseType::non_callable}, true},
        {"simple_dao.sol", "m16_inbound_token.sol", "withdraw", {CauseType::no_financial_risk}, true},
    };
    std::size_t passed = 0;
    for (const auto& f : flips) {
        FileReport before = analyze_file(canonical_dir() / f.sample, f.sample);
        FileReport after = analyze_file(mutants_dir() / f.mutant, f.mutant);
        std::vector<FileReport> bs{std::move(before)}, as{std::move(after)};
        const Verdict* vb = verdict_of(bs, f.sample, f.function);
        const Verdict* va = verdict_of(as, f.mutant, f.function);
        bool ok = vb && va;
        for (auto rule : f.rules) {
            if (!ok)
                break;
            if (f.addition)
                ok = !has_rule(*vb, rule) && vb->classification == Classification::likely_true_positive &&
                     has_rule(*va, rule) && va->classification == Classification::suppressed_false_positive;
            else
                ok = has_rule(*vb, rule) && !has_rule(*va, rule);
        }
        c.expect(ok, f.mutant + " did not flip");
        passed += ok;
    }
    c.expect(flips.size() >= 16, "fewer than 16 mutants");
    c.notes << (c.ok ? "" : " | ") << passed << "/" << flips.size() << " mutants flip as labeled";
}

// 4. Flow oracle.
void flow_oracle(Check& c)
{
    auto st = run_flow_oracle(20240601u, 200);
    c.expect(st.graphs == 200, "generated " + std::to_string(st.graphs) + " graphs");
    c.expect(st.disagreements == 0, std::to_string(st.disagreements) + " disagreements, first: " + st.first_disagreement);
    c.notes << (c.ok ? "" : " | ") << st.graphs << " graphs, " << st.sites << " call sites, " << st.positions
            << " positions, " << st.disagreements << " disagreements";
}

// 5. Determinism.
void determinism(Check& c)
{
    auto files = discover(canonical_dir());
    std::string outputs[2];
    std::mt19937 rng(99);
    for (int run = 0; run < 2; ++run) {
        std::shuffle(files.begin(), files.end(), rng);
        auto batch = run_batch(files, {}, AnalysisOptions{}, run == 0 ? 1 : 4);
        std::vector<const FileReport*> ptrs;
        for (const auto& r : batch.reports)
            ptrs.push_back(&r);
        std::shuffle(ptrs.begin(), ptrs.end(), rng);
        outputs[run] = analysis_report(ptrs, "2024-01-01T00:00:00Z").dump(2);
    }
    c.expect(outputs[0] == outputs[1], "in-process reports differ");

    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    auto a = cli({"analyze", canonical_dir().string(), "--format", "json"});
    auto b = cli({"analyze", canonical_dir().string(), "--format", "json"});
    ::unsetenv("SOURCE_DATE_EPOCH");
    c.expect(a.code == 0 && a.out == b.out, "CLI reports differ");
    c.notes << (c.ok ? "" : " | ") << outputs[0].size() << " bytes identical across shuffled runs";
}

// 6. Metric formulas on the 20-file derived corpus, against hand-computed values.
void metric_formulas(Check& c)
{
    auto run = [&](const std::string& rules) {
        auto r = cli({"bench", mutants_dir().string(), "--labels", (mutants_dir() / "labels.csv").string(), "--rules",
                      rules, "--format", "json"});
        return nlohmann::json::parse(r.out);
    };
    auto fmt = [](const nlohmann::json& v) { return format_ratio(v.get<double>()); };
    auto on = run("all");
    auto off = run("");
    c.expect(on["input_count"] == 20, "input_count");
    c.expect(on["duplicate_count"] == 1, "duplicate_count");
    c.expect(on["analyzed_count"] == 18, "analyzed_count");
    c.expect(on["failed_count"] == 1, "failed_count");
    c.expect(on["candidate_count"] == 18, "candidate_count");
    c.expect(on["reported_count"] == 5, "reported_count");
    c.expect(on["tp_count"] == 3, "tp_count");
    c.expect(fmt(on["precision"]) == "0.600000", "precision " + fmt(on["precision"]));
    c.expect(on["reported_contract_count"] == 5, "reported_contract_count");
    c.expect(fmt(on["reported_rate"]) == "0.277778", "reported_rate " + fmt(on["reported_rate"]));
    c.expect(fmt(on["candidate_rate"]) == "0.944444", "candidate_rate");
    const std::map<std::string, int> causes = {{"identity_control", 1},      {"address_control", 1},
                                               {"reentrancy_lock", 1},       {"no_state_change", 1},
                                               {"no_financial_risk", 4},     {"special_transfer_value", 1},
                                               {"gas_stipend_transfer_send", 3}, {"non_callable", 2}};
    for (const auto& [name, n] : causes)
        c.expect(on["per_cause_counts"][name] == n, "per_cause_counts." + name);
    c.expect(off["reported_count"] == 18 && off["tp_count"] == 3, "rules-off counts");
    c.expect(fmt(off["precision"]) == "0.166667", "rules-off precision " + fmt(off["precision"]));
    c.expect(fmt(off["reported_rate"]) == "0.944444", "rules-off reported_rate");
    c.notes << (c.ok ? "" : " | ") << "precision " << fmt(on["precision"]) << " (off " << fmt(off["precision"])
            << "), reported_rate " << fmt(on["reported_rate"]) << " (off " << fmt(off["reported_rate"]) << ")";
}

std::string pathological_source(int depth)
{
    std::ostringstream s;
    s << "pragma solidity ^0.8.0;\ncontract Deep {\n    mapping(address => uint) bal;\n    uint counter;\n";
    s << "    function f(uint x) public {\n";
    for (int i = 0; i < depth; ++i)
        s << "if (x > " << i << ") { counter += " << i << "; payable(msg.sender).call{value: " << i << "}(\"\"); ";
    s << "bal[msg.sender] = 0;";
    for (int i = 0; i < depth; ++i)
        s << " counter -= 1; }";
    s << "\n    }\n}\n";
    return s.str();
}

// 7. Timeout handling.
void timeout_behavior(Check& c)
{
    fs::path dir = temp_dir("acceptance-timeout");
    for (const auto& f : discover(canonical_dir()))
        fs::copy_file(f.path, dir / f.name);
    fs::copy_file(canonical_dir() / "labels.csv", dir / "labels.csv");
    write_file(dir / "zz_deep.sol", pathological_source(900));

    auto start = std::chrono::steady_clock::now();
    auto r = cli({"bench", dir.string(), "--labels", (dir / "labels.csv").string(), "--timeout", "1", "--format",
                  "json", "--assert"});
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto j = nlohmann::json::parse(r.out, nullptr, false);
    c.expect(!j.is_discarded(), "bench output is not JSON");
    if (!j.is_discarded()) {
        c.expect(j["failed_count"] == 1, "failed_count " + j["failed_count"].dump());
        c.expect(j["analyzed_count"] == 8, "analyzed_count " + j["analyzed_count"].dump());
    }
    c.expect(r.code == 0, "batch exit code " + std::to_string(r.code));

    AnalysisOptions o;
    o.timeout_seconds = 1;
    FileReport deep = analyze_file(dir / "zz_deep.sol", "zz_deep.sol", o);
    c.expect(deep.status != FileStatus::ok, "pathological file analyzed");
    fs::remove_all(dir);
    c.notes << (c.ok ? "" : " | ") << "pathological file " << to_string(deep.status) << ", 8 others analyzed, "
            << std::fixed << std::setprecision(2) << secs << " s";
}

// 8. Fetch client against a local mock endpoint.
void fetch_client(Check& c)
{
    MockExplorer mock;
    ::setenv("RTRIAGE_ACCEPTANCE_KEY", MockExplorer::kExpectedKey, 1);
    fs::path root = temp_dir("acceptance-fetch");
    fs::path conf = root / "fetch.conf";
    write_file(conf, "endpoint = " + mock.url_template() + "\napi_key_env = RTRIAGE_ACCEPTANCE_KEY\nbackoff = 0.01\n");
    auto fetch = [&](const std::string& addr, const fs::path& out) {
        return cli({"fetch", addr, "--out", out.string(), "--config", conf.string()}).code;
    };

    fs::path ok_dir = root / "ok";
    int ok = fetch(MockExplorer::kSingle, ok_dir);
    c.expect(ok == 0, "success exit " + std::to_string(ok));
    c.expect(fs::exists(ok_dir / "Vault.sol") &&
                 fs::exists(ok_dir / (std::string(MockExplorer::kSingle) + ".metadata.json")),
             "success files missing");

    const std::vector<std::tuple<std::string, int, std::string>> failures = {
        {MockExplorer::kNotVerified, 4, "not-verified"},
        {MockExplorer::kRateLimit429, 5, "rate-limit"},
        {MockExplorer::kRateLimitBody, 5, "rate-limit body"},
        {MockExplorer::kMalformed, 3, "malformed"},
    };
    for (const auto& [addr, code, label] : failures) {
        fs::path d = root / label;
        int got = fetch(addr, d);
        c.expect(got == code, label + " exit " + std::to_string(got));
        c.expect(!fs::exists(d) || fs::is_empty(d), label + " left files");
    }
    // Injected placement failure: a directory occupies the second source name.
    fs::path clash = root / "clash";
    fs::create_directories(clash / "contracts_lib_B.sol");
    fetch(MockExplorer::kMulti, clash);
    c.expect(listing(clash) == std::vector<std::string>{"contracts_lib_B.sol"}, "partial files after failed placement");
    c.expect(!mock.saw_wrong_key(), "credential not taken from the environment");
    fs::remove_all(root);
    c.notes << (c.ok ? "" : " | ") << "exit codes 0/4/5/3 as documented, no partial files";
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"canonical corpus fidelity", canonical_fidelity},
        {"precision improvement", precision_property},
        {"metamorphic rule mutants", metamorphic},
        {"flow oracle equivalence", flow_oracle},
        {"deterministic order-independent reports", determinism},
        {"metric formulas on derived corpus", metric_formulas},
        {"per-file timeout", timeout_behavior},
        {"fetch client exit codes and atomic writes", fetch_client},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Check c;
        try {
            fn(c);
        }
        catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        failed += !c.ok;
        std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << index << ": " << name << " -- " << c.notes.str()
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
