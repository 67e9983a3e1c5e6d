#include "rtriage/detector.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace rtriage {

const char* to_string(DetectorVariant v)
{
    return v == DetectorVariant::cei_violation ? "cei_violation" : "bare_external_call";
}

std::string finding_id(const std::string& file, const std::string& contract, const std::string& function,
                       const Span& at)
{
    std::string key = file + "|" + contract + "|" + function + "|" + std::to_string(at.line) + ":" +
                      std::to_string(at.column);
    return to_hex(fnv1a64(key));
}

namespace {

bool finding_less(const Finding& a, const Finding& b)
{
    return std::tie(a.file, a.location.line, a.location.column, a.location.offset, a.contract, a.function) <
           std::tie(b.file, b.location.line, b.location.column, b.location.offset, b.contract, b.function);
}

} // namespace

std::vector<Finding> detect(const FileFacts& facts, std::size_t c, const DetectorConfig& config)
{
    const FlatContract& contract = facts.contracts()[c];
    std::vector<Finding> out;
    const auto& fns = facts.functions(c);
    for (std::size_t f = 0; f < fns.size(); ++f) {
        const FunctionFacts& ff = fns[f];
        if (ff.function->origin != contract.name || !ff.function->body)
            continue;
        const Cfg& cfg = ff.cfg;
        std::map<std::uint32_t, Finding> by_offset;
        for (std::size_t s = 0; s < cfg.sites.size(); ++s) {
            const CallSite& site = cfg.sites[s];
            if (config.call_kinds.count(site.call_kind) == 0)
                continue;
            auto [it, fresh] = by_offset.try_emplace(site.location.offset);
            Finding& fd = it->second;
            if (fresh) {
                fd.file = facts.path();
                fd.contract = contract.name;
                fd.function = ff.function->name;
                fd.qualified_function = ff.function->qualified_name;
                fd.call_site = site;
                fd.location = site.location;
                fd.contract_index = c;
                fd.function_index = f;
                fd.id = finding_id(fd.file, fd.contract, fd.function, fd.location);
            }
            fd.occurrences.push_back(s);
            auto writes = writes_after(cfg, s);
            fd.post_writes.insert(fd.post_writes.end(), writes.begin(), writes.end());
        }
        for (auto& [offset, fd] : by_offset) {
            std::sort(fd.post_writes.begin(), fd.post_writes.end());
            fd.post_writes.erase(std::unique(fd.post_writes.begin(), fd.post_writes.end()), fd.post_writes.end());
            fd.variant = fd.post_writes.empty() ? DetectorVariant::bare_external_call : DetectorVariant::cei_violation;
            if (fd.variant == DetectorVariant::bare_external_call && !config.report_bare)
                continue;
            out.push_back(std::move(fd));
        }
    }
    std::sort(out.begin(), out.end(), finding_less);
    return out;
}

std::vector<Finding> detect_all(const FileFacts& facts, const DetectorConfig& config)
{
    std::vector<Finding> out;
    for (std::size_t c = 0; c < facts.contracts().size(); ++c) {
        auto part = detect(facts, c, config);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::sort(out.begin(), out.end(), finding_less);
    return out;
}

} // namespace rtriage
