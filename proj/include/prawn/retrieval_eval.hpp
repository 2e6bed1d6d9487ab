#pragma once

#include "prawn/types.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prawn::eval {

struct RankedList {
    std::string query_id;
    std::vector<std::string> gif_ids; // best first
    std::vector<double> scores;       // non-increasing
};

struct AnnotationRow {
    std::string query_id;
    std::string gif_id;
    int rater_a = 0; // binary appropriateness ratings
    int rater_b = 0;
};

struct UndefinedAgreementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fraction of queries whose ground-truth gif appears in the top k.
double precision_at_k(std::span<const RankedList> lists,
                      const std::map<std::string, std::string>& truth, int k);

// nDCG with linear gain and log2(i+1) discount. The ideal ordering comes from
// the pool sorted descending; an all-zero pool scores 0 by convention.
double ndcg(std::span<const int> relevances, std::vector<int> ideal_pool);

// Krippendorff's alpha for two raters and nominal binary values, via the
// coincidence-matrix formulation. Throws UndefinedAgreementError when every
// rating is identical (expected disagreement is zero).
double krippendorff_alpha_binary(std::span<const AnnotationRow> table);

// Exact top-k over unit-norm rows by dot product, descending, ties by
// lexicographically smaller id. Throws when k exceeds the index size.
RankedList topk_cosine(const Mat& index, std::span<const std::string> ids, const Vec& query,
                       int k, const std::string& query_id = {});

// Ranked-list file: CSV `query_id,rank,gif_id,score`.
void write_ranked_lists(std::ostream& out, std::span<const RankedList> lists);
std::vector<RankedList> read_ranked_lists(std::istream& in);

// Annotation file: CSV `query_id,gif_id,rater_a,rater_b`.
void write_annotations(std::ostream& out, std::span<const AnnotationRow> rows);
std::vector<AnnotationRow> read_annotations(std::istream& in);

// Relevance of each ranked item (sum of the two ratings); items without an
// annotation row count as 0.
std::vector<int> relevances_for(const RankedList& list,
                                std::span<const AnnotationRow> annotations);

} // namespace prawn::eval
