#pragma once

// Per-song PLSA: EM over the song's candidate sentences, additive smoothing
// in every M-step, and a fold-in path so unseen sentences can be embedded.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tipmine/error.hpp"
#include "tipmine/hashing.hpp"
#include "tipmine/serde.hpp"

namespace tipmine {

struct TopicConfig {
    int topics = 8;
    int iterations = 50;
    int fold_in_iterations = 20;
    double epsilon = 1e-6;  // additive smoothing before M-step normalization
    std::uint64_t seed = 0;
};

using TopicVector = std::vector<double>;  // length t, on the simplex

// Adds epsilon to every count then normalizes. An all-zero row with positive
// epsilon becomes uniform; epsilon = 0 is the exact maximum-likelihood step.
inline std::vector<double> smooth(const std::vector<double>& counts,
                                  double epsilon) {
    std::vector<double> out(counts.size(), 0.0);
    if (counts.empty()) return out;
    double total = 0.0;
    for (double c : counts) total += c + epsilon;
    if (total <= 0.0) {
        const double u = 1.0 / static_cast<double>(counts.size());
        for (double& v : out) v = u;
        return out;
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[i] = (counts[i] + epsilon) / total;
    return out;
}

struct TopicModel {
    TopicConfig config;
    std::map<std::string, std::uint32_t> vocab;       // token -> column
    std::vector<std::vector<double>> word_given_topic;  // t rows x V
    std::vector<std::vector<double>> topic_given_doc;   // D rows x t
    std::vector<double> log_likelihood;                 // after init + each iter
};

namespace detail {

struct BagOfWords {
    std::vector<std::uint32_t> word;
    std::vector<double> count;
};

inline std::vector<BagOfWords> to_bags(
    const std::vector<std::vector<std::string>>& docs,
    const std::map<std::string, std::uint32_t>& vocab) {
    std::vector<BagOfWords> bags(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<std::uint32_t, double> counts;
        for (const auto& tok : docs[d]) {
            auto it = vocab.find(tok);
            if (it != vocab.end()) counts[it->second] += 1.0;
        }
        for (const auto& [w, c] : counts) {
            bags[d].word.push_back(w);
            bags[d].count.push_back(c);
        }
    }
    return bags;
}

inline double corpus_log_likelihood(
    const std::vector<BagOfWords>& bags,
    const std::vector<std::vector<double>>& phi,
    const std::vector<std::vector<double>>& theta) {
    const int t = static_cast<int>(phi.size());
    double ll = 0.0;
    for (std::size_t d = 0; d < bags.size(); ++d) {
        for (std::size_t k = 0; k < bags[d].word.size(); ++k) {
            const std::uint32_t w = bags[d].word[k];
            double p = 0.0;
            for (int z = 0; z < t; ++z) p += theta[d][z] * phi[z][w];
            ll += bags[d].count[k] * std::log(std::max(p, 1e-300));
        }
    }
    return ll;
}

inline std::vector<double> random_simplex(std::size_t n,
                                          tipmine::Uniform01& rng) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) {
        x = rng.next() + 1e-6;
        sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
}

}  // namespace detail

// EM with per-pair posteriors: E-step P(z|d,w) proportional to P(z|d)P(w|z),
// M-step renormalizes smoothed expected counts. Random simplex init under the
// seed makes runs reproducible.
inline TopicModel train_plsa(const std::vector<std::vector<std::string>>& docs,
                             const TopicConfig& cfg = {}) {
    if (cfg.topics <= 0) throw UsageError("topic count must be positive");
    if (docs.size() < static_cast<std::size_t>(cfg.topics))
        throw DataError("fewer documents than topics: " +
                        std::to_string(docs.size()) + " < " +
                        std::to_string(cfg.topics));

    TopicModel m;
    m.config = cfg;
    for (const auto& doc : docs)
        for (const auto& tok : doc) m.vocab.emplace(tok, 0);
    if (m.vocab.empty()) throw DataError("empty vocabulary");
    std::uint32_t next = 0;
    for (auto& [tok, idx] : m.vocab) idx = next++;
    const std::size_t V = m.vocab.size();
    const int t = cfg.topics;
    const std::size_t D = docs.size();

    Uniform01 rng(cfg.seed);
    m.word_given_topic.resize(t);
    for (int z = 0; z < t; ++z)
        m.word_given_topic[z] = detail::random_simplex(V, rng);
    m.topic_given_doc.resize(D);
    for (std::size_t d = 0; d < D; ++d)
        m.topic_given_doc[d] = detail::random_simplex(t, rng);

    const auto bags = detail::to_bags(docs, m.vocab);
    m.log_likelihood.push_back(
        detail::corpus_log_likelihood(bags, m.word_given_topic,
                                      m.topic_given_doc));

    std::vector<std::vector<double>> phi_acc(t, std::vector<double>(V));
    std::vector<double> post(t);
    for (int it = 0; it < cfg.iterations; ++it) {
        for (auto& row : phi_acc) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t d = 0; d < D; ++d) {
            std::vector<double> theta_acc(t, 0.0);
            for (std::size_t k = 0; k < bags[d].word.size(); ++k) {
                const std::uint32_t w = bags[d].word[k];
                const double n = bags[d].count[k];
                double sum = 0.0;
                for (int z = 0; z < t; ++z) {
                    post[z] = m.topic_given_doc[d][z] * m.word_given_topic[z][w];
                    sum += post[z];
                }
                if (sum <= 0.0) continue;
                for (int z = 0; z < t; ++z) {
                    const double q = n * post[z] / sum;
                    phi_acc[z][w] += q;
                    theta_acc[z] += q;
                }
            }
            m.topic_given_doc[d] = smooth(theta_acc, cfg.epsilon);
        }
        for (int z = 0; z < t; ++z)
            m.word_given_topic[z] = smooth(phi_acc[z], cfg.epsilon);
        m.log_likelihood.push_back(
            detail::corpus_log_likelihood(bags, m.word_given_topic,
                                          m.topic_given_doc));
    }
    return m;
}

// Fold-in: P(w|z) stays fixed, only the new document's topic mixture is
// iterated from uniform. Unknown tokens are ignored; a sentence with no
// known tokens embeds as the uniform vector.
inline TopicVector infer_topics(const TopicModel& m,
                                const std::vector<std::string>& tokens) {
    const int t = m.config.topics;
    TopicVector theta(t, 1.0 / static_cast<double>(t));

    std::map<std::uint32_t, double> counts;
    for (const auto& tok : tokens) {
        auto it = m.vocab.find(tok);
        if (it != m.vocab.end()) counts[it->second] += 1.0;
    }
    if (counts.empty()) return theta;

    std::vector<double> post(t);
    for (int it = 0; it < m.config.fold_in_iterations; ++it) {
        std::vector<double> acc(t, 0.0);
        for (const auto& [w, n] : counts) {
            double sum = 0.0;
            for (int z = 0; z < t; ++z) {
                post[z] = theta[z] * m.word_given_topic[z][w];
                sum += post[z];
            }
            if (sum <= 0.0) continue;
            for (int z = 0; z < t; ++z) acc[z] += n * post[z] / sum;
        }
        theta = smooth(acc, m.config.epsilon);
    }
    return theta;
}

// ---- persistence ----

inline void save_topic_model(const TopicModel& m, const std::string& path) {
    OrderedJson j;
    j["kind"] = "topics";
    j["version"] = 1;
    j["topics"] = m.config.topics;
    j["iterations"] = m.config.iterations;
    j["fold_in_iterations"] = m.config.fold_in_iterations;
    j["epsilon"] = m.config.epsilon;
    j["seed"] = m.config.seed;
    OrderedJson vocab = OrderedJson::array();
    for (const auto& [tok, idx] : m.vocab)
        vocab.push_back(OrderedJson::array({tok, idx}));
    j["vocab"] = std::move(vocab);
    j["word_given_topic"] = m.word_given_topic;
    j["topic_given_doc"] = m.topic_given_doc;
    write_model_file(path, j);
}

inline TopicModel load_topic_model(const std::string& path) {
    const OrderedJson j = read_model_file(path, "topics", 1);
    TopicModel m;
    try {
        m.config.topics = j.at("topics").get<int>();
        m.config.iterations = j.at("iterations").get<int>();
        m.config.fold_in_iterations = j.at("fold_in_iterations").get<int>();
        m.config.epsilon = j.at("epsilon").get<double>();
        m.config.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& entry : j.at("vocab"))
            m.vocab[entry.at(0).get<std::string>()] =
                entry.at(1).get<std::uint32_t>();
        for (const auto& row : j.at("word_given_topic"))
            m.word_given_topic.push_back(doubles_from_json(row, "word_given_topic"));
        for (const auto& row : j.at("topic_given_doc"))
            m.topic_given_doc.push_back(doubles_from_json(row, "topic_given_doc"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed topic model: " + e.what());
    }
    if (m.word_given_topic.size() != static_cast<std::size_t>(m.config.topics))
        throw DataError(path + ": topic model shape mismatch");
    for (const auto& row : m.word_given_topic)
        if (row.size() != m.vocab.size())
            throw DataError(path + ": topic model vocabulary mismatch");
    return m;
}

}  // namespace tipmine
