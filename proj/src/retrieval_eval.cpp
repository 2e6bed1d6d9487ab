#include "prawn/retrieval_eval.hpp"

#include "prawn/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace prawn::eval {

double precision_at_k(std::span<const RankedList> lists,
                      const std::map<std::string, std::string>& truth, int k) {
    if (lists.empty()) throw std::invalid_argument("precision_at_k: no queries");
    if (k < 1) throw std::invalid_argument("precision_at_k: k must be positive");
    long hits = 0;
    for (const RankedList& list : lists) {
        if (static_cast<std::size_t>(k) > list.gif_ids.size())
            throw std::invalid_argument("precision_at_k: k larger than ranked list for query " +
                                        list.query_id);
        const auto it = truth.find(list.query_id);
        if (it == truth.end())
            throw std::invalid_argument("precision_at_k: no ground truth for query " +
                                        list.query_id);
        const auto begin = list.gif_ids.begin();
        if (std::find(begin, begin + k, it->second) != begin + k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(lists.size());
}

double ndcg(std::span<const int> relevances, std::vector<int> ideal_pool) {
    for (const int rel : relevances)
        if (rel < 0 || rel > 2)
            throw std::invalid_argument("ndcg: relevance outside {0,1,2}");
    for (const int rel : ideal_pool)
        if (rel < 0 || rel > 2)
            throw std::invalid_argument("ndcg: pool relevance outside {0,1,2}");

    std::sort(ideal_pool.begin(), ideal_pool.end(), std::greater<>());
    const std::size_t depth = std::min(relevances.size(), ideal_pool.size());
    double dcg = 0.0, idcg = 0.0;
    for (std::size_t i = 0; i < relevances.size(); ++i)
        dcg += relevances[i] / std::log2(static_cast<double>(i) + 2.0);
    for (std::size_t i = 0; i < depth; ++i)
        idcg += ideal_pool[i] / std::log2(static_cast<double>(i) + 2.0);
    if (idcg == 0.0) return 0.0;
    return dcg / idcg;
}

double krippendorff_alpha_binary(std::span<const AnnotationRow> table) {
    if (table.size() < 2)
        throw std::invalid_argument("krippendorff_alpha_binary: need at least 2 items");
    std::set<std::pair<std::string, std::string>> seen;
    // 2x2 coincidence matrix; each unit contributes both ordered pairs.
    double coincidence[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (const AnnotationRow& row : table) {
        if ((row.rater_a != 0 && row.rater_a != 1) || (row.rater_b != 0 && row.rater_b != 1))
            throw std::invalid_argument("krippendorff_alpha_binary: ratings must be 0/1");
        if (!seen.emplace(row.query_id, row.gif_id).second)
            throw std::invalid_argument("krippendorff_alpha_binary: duplicate item " +
                                        row.query_id + "/" + row.gif_id);
        coincidence[row.rater_a][row.rater_b] += 1.0;
        coincidence[row.rater_b][row.rater_a] += 1.0;
    }
    const double n0 = coincidence[0][0] + coincidence[0][1];
    const double n1 = coincidence[1][0] + coincidence[1][1];
    const double n = n0 + n1;
    const double observed = (coincidence[0][1] + coincidence[1][0]) / n;
    const double expected = (n0 * n1 + n1 * n0) / (n * (n - 1.0));
    if (expected == 0.0)
        throw UndefinedAgreementError(
            "krippendorff_alpha_binary: all ratings identical, agreement undefined");
    return 1.0 - observed / expected;
}

RankedList topk_cosine(const Mat& index, std::span<const std::string> ids, const Vec& query,
                       int k, const std::string& query_id) {
    const Index n = index.rows();
    if (k < 1) throw std::invalid_argument("topk_cosine: k must be positive");
    if (static_cast<Index>(k) > n)
        throw std::invalid_argument("topk_cosine: k exceeds index size");
    if (static_cast<Index>(ids.size()) != n)
        throw std::invalid_argument("topk_cosine: id count does not match index rows");
    if (query.size() != index.cols())
        throw std::invalid_argument("topk_cosine: query dimension mismatch");

    const Vec scores = index * query;
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const auto better = [&](Index a, Index b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);

    RankedList list;
    list.query_id = query_id;
    list.gif_ids.reserve(static_cast<std::size_t>(k));
    list.scores.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        list.gif_ids.push_back(ids[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
        list.scores.push_back(scores(order[static_cast<std::size_t>(i)]));
    }
    return list;
}

void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists) {
    out << "query_id,rank,gif_id,score\n";
    std::ostringstream fmt;
    fmt.precision(17);
    for (const RankedList& list : lists)
        for (std::size_t i = 0; i < list.gif_ids.size(); ++i) {
            fmt.str("");
            fmt << list.scores[i];
            out << list.query_id << ',' << (i + 1) << ',' << list.gif_ids[i] << ',' << fmt.str()
                << '\n';
        }
}

std::vector<RankedList> read_ranked_lists(std::istream& in) {
    std::vector<RankedList> lists;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "query_id,rank,gif_id,score") continue;
        }
        const auto fields = io::split_csv_line(line);
        if (fields.size() != 4)
            throw std::runtime_error("ranked list csv: malformed line: " + line);
        if (lists.empty() || lists.back().query_id != fields[0]) {
            lists.push_back(RankedList{fields[0], {}, {}});
        }
        const std::size_t rank = std::stoul(fields[1]);
        if (rank != lists.back().gif_ids.size() + 1)
            throw std::runtime_error("ranked list csv: ranks out of order for query " + fields[0]);
        lists.back().gif_ids.push_back(fields[2]);
        lists.back().scores.push_back(std::stod(fields[3]));
    }
    return lists;
}

void write_annotations(std::ostream& out, std::span<const AnnotationRow> rows) {
    out << "query_id,gif_id,rater_a,rater_b\n";
    for (const AnnotationRow& row : rows)
        out << row.query_id << ',' << row.gif_id << ',' << row.rater_a << ',' << row.rater_b
            << '\n';
}

std::vector<AnnotationRow> read_annotations(std::istream& in) {
    std::vector<AnnotationRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "query_id,gif_id,rater_a,rater_b") continue;
        }
        const auto fields = io::split_csv_line(line);
        if (fields.size() != 4)
            throw std::runtime_error("annotation csv: malformed line: " + line);
        rows.push_back(AnnotationRow{fields[0], fields[1], std::stoi(fields[2]),
                                     std::stoi(fields[3])});
    }
    return rows;
}

std::vector<int> relevances_for(const RankedList& list,
                                std::span<const AnnotationRow> annotations) {
    std::vector<int> rels;
    rels.reserve(list.gif_ids.size());
    for (const std::string& gif : list.gif_ids) {
        int rel = 0;
        for (const AnnotationRow& row : annotations)
            if (row.query_id == list.query_id && row.gif_id == gif) {
                rel = row.rater_a + row.rater_b;
                break;
            }
        rels.push_back(rel);
    }
    return rels;
}

} // namespace prawn::eval
