#include "reflectforge/scft.hpp"

#include "reflectforge/errors.hpp"
#include "reflectforge/jsonl.hpp"
#include "reflectforge/util.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace reflectforge {

std::string_view to_string(CritiqueCategory category) {
    switch (category) {
        case CritiqueCategory::i_to_c: return "i_to_c";
        case CritiqueCategory::c_to_c: return "c_to_c";
        case CritiqueCategory::rejected: return "rejected";
    }
    return "rejected";
}

Critique apply_filter(const Problem& problem, const Trace& trace, const std::string& critique_text,
                      std::string_view boxed_marker) {
    Critique c;
    c.problem_id = problem.id;
    c.raw_text = critique_text;
    c.acc_y = judge_correct(trace.raw_text, problem, boxed_marker);
    c.acc_c = judge_correct(critique_text, problem, boxed_marker);
    try {
        auto extracted = extract_answer(critique_text, boxed_marker);
        c.critique_answer = normalize(extracted.raw);
    } catch (const ValidationError&) {
        c.critique_answer.reset();
    }
    if (!c.acc_c) {
        c.category = CritiqueCategory::rejected;
    } else {
        c.category = c.acc_y ? CritiqueCategory::c_to_c : CritiqueCategory::i_to_c;
    }
    return c;
}

namespace {

// nearest integer to num/den, half away from zero; num, den >= 0
std::size_t divide_nearest(std::size_t num, std::size_t den) {
    return (2 * num + den) / (2 * den);
}

// std::shuffle is implementation-defined; this stays byte-stable everywhere.
void fisher_yates(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::vector<std::size_t> pick(std::vector<std::size_t> indices, std::size_t count,
                              std::mt19937_64& rng) {
    fisher_yates(indices, rng);
    indices.resize(std::min(count, indices.size()));
    std::sort(indices.begin(), indices.end());  // preserve pool order downstream
    return indices;
}

}  // namespace

std::vector<Critique> balance_dataset(const std::vector<Critique>& pool,
                                      const Rational& ratio_ic_to_cc, std::uint64_t seed,
                                      std::optional<std::size_t> target_ic,
                                      std::optional<std::size_t> target_cc) {
    if (ratio_ic_to_cc <= Rational(0)) {
        throw ValidationError("balance ratio must be positive");
    }
    std::vector<std::size_t> ic_idx;
    std::vector<std::size_t> cc_idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        switch (pool[i].category) {
            case CritiqueCategory::i_to_c: ic_idx.push_back(i); break;
            case CritiqueCategory::c_to_c: cc_idx.push_back(i); break;
            case CritiqueCategory::rejected:
                throw ValidationError("balance pool contains a rejected critique (problem " +
                                      pool[i].problem_id + ")");
        }
    }
    const std::size_t avail_ic = ic_idx.size();
    const std::size_t avail_cc = cc_idx.size();
    const auto p = static_cast<std::size_t>(ratio_ic_to_cc.num());
    const auto q = static_cast<std::size_t>(ratio_ic_to_cc.den());

    std::size_t n_ic = 0;
    std::size_t n_cc = 0;
    if (target_ic) {
        n_ic = std::min(*target_ic, avail_ic);
    } else {
        n_ic = std::min(avail_ic, divide_nearest(avail_cc * p, q));
    }
    if (target_cc) {
        n_cc = std::min(*target_cc, avail_cc);
    } else {
        n_cc = std::min(avail_cc, divide_nearest(n_ic * q, p));
    }

    const bool ic_demanded = target_ic ? *target_ic > 0 : true;
    const bool cc_demanded = target_cc ? *target_cc > 0 : true;
    if ((ic_demanded && avail_ic == 0) || (cc_demanded && avail_cc == 0)) {
        throw BalancingError(avail_ic, avail_cc,
                             "cannot balance: pool has " + std::to_string(avail_ic) +
                                 " i_to_c and " + std::to_string(avail_cc) + " c_to_c critiques");
    }

    std::mt19937_64 rng(seed);
    const auto ic_sel = pick(std::move(ic_idx), n_ic, rng);
    const auto cc_sel = pick(std::move(cc_idx), n_cc, rng);

    std::vector<std::size_t> merged;
    merged.reserve(ic_sel.size() + cc_sel.size());
    merged.insert(merged.end(), ic_sel.begin(), ic_sel.end());
    merged.insert(merged.end(), cc_sel.begin(), cc_sel.end());
    std::sort(merged.begin(), merged.end());

    std::vector<Critique> out;
    out.reserve(merged.size());
    for (auto i : merged) {
        out.push_back(pool[i]);
    }
    return out;
}

ScftExample make_scft_example(const Problem& problem, const Trace& response,
                              const Critique& critique, const PromptTemplate& tmpl) {
    if (!critique.kept()) {
        throw ValidationError("rejected critique cannot become a training example (problem " +
                              problem.id + ")");
    }
    ScftExample ex;
    ex.instruction = tmpl.render(problem.question, response.raw_text);
    ex.output = critique.raw_text;
    ex.category = critique.category;
    ex.problem_id = problem.id;
    return ex;
}

std::size_t emit_scft_jsonl(const std::vector<ScftExample>& examples,
                            const std::filesystem::path& path, bool chat_schema) {
    JsonlWriter writer(path);
    for (const auto& ex : examples) {
        if (ex.category == CritiqueCategory::rejected) {
            throw ValidationError("rejected example reached the emitter (problem " + ex.problem_id +
                                  ")");
        }
        nlohmann::ordered_json obj;
        if (chat_schema) {
            obj["messages"] = nlohmann::ordered_json::array(
                {{{"role", "user"}, {"content", ex.instruction}},
                 {{"role", "assistant"}, {"content", ex.output}}});
        } else {
            obj["instruction"] = ex.instruction;
            obj["output"] = ex.output;
        }
        obj["category"] = std::string(to_string(ex.category));
        obj["problem_id"] = ex.problem_id;
        writer.write(obj);
    }
    writer.close();
    return writer.lines();
}

void write_scft_manifest(const ScftManifest& manifest, const std::filesystem::path& path) {
    nlohmann::ordered_json obj;
    obj["pool"] = {{"i_to_c", manifest.pool_i_to_c},
                   {"c_to_c", manifest.pool_c_to_c},
                   {"rejected", manifest.pool_rejected}};
    obj["selected"] = {{"i_to_c", manifest.selected_i_to_c}, {"c_to_c", manifest.selected_c_to_c}};
    obj["emitted"] = manifest.emitted;
    obj["ratio_ic_to_cc"] = manifest.ratio;
    obj["seed"] = manifest.seed;
    obj["lexicon_hash"] = manifest.lexicon_hash;
    obj["filter"] = {{"acc_y1_acc_c1", manifest.filter.acc_y1_acc_c1},
                     {"acc_y0_acc_c1", manifest.filter.acc_y0_acc_c1},
                     {"acc_y1_acc_c0", manifest.filter.acc_y1_acc_c0},
                     {"acc_y0_acc_c0", manifest.filter.acc_y0_acc_c0}};
    write_text_file_atomic(path, obj.dump(2) + "\n");
}

std::size_t build_self_distill_jsonl(const std::vector<Trace>& traces,
                                     const std::vector<Problem>& problems,
                                     const std::filesystem::path& path,
                                     std::optional<std::size_t> match_size, std::uint64_t seed) {
    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) {
        by_id[p.id] = &p;
    }
    std::vector<std::size_t> correct_idx;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (!traces[i].is_correct.has_value()) {
            throw ValidationError("trace for problem " + traces[i].problem_id +
                                  " has not been scored for correctness");
        }
        if (*traces[i].is_correct) {
            correct_idx.push_back(i);
        }
    }
    if (match_size && correct_idx.size() > *match_size) {
        std::mt19937_64 rng(seed);
        correct_idx = pick(std::move(correct_idx), *match_size, rng);
    }
    JsonlWriter writer(path);
    for (auto i : correct_idx) {
        const auto it = by_id.find(traces[i].problem_id);
        if (it == by_id.end()) {
            throw ValidationError("trace references unknown problem " + traces[i].problem_id);
        }
        nlohmann::ordered_json obj;
        obj["instruction"] = it->second->question;
        obj["output"] = traces[i].raw_text;
        obj["problem_id"] = traces[i].problem_id;
        writer.write(obj);
    }
    writer.close();
    return writer.lines();
}

}  // namespace reflectforge
