#pragma once

#include "anvaya/annotation.hpp"
#include "anvaya/profile.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace anvaya {

// A head word and the modifiers that travel with it, in emission order.
// Particles are never chunk members.
struct Chunk {
    std::size_t head = 0;
    std::vector<std::size_t> members;

    bool operator==(const Chunk&) const = default;
};

// clause id -> chunks of that clause, ordered by head index
using ClauseChunks = std::map<std::string, std::vector<Chunk>>;

/// Groups every non-particle token into exactly one chunk. Modifiers precede
/// their head (recursively, siblings in source order, negations last so they
/// sit immediately before the head); appositives follow the head or join the
/// pre-head modifiers per profile. With R-chunk disabled, members keep source
/// order.
///
/// Throws LinearizeError when a modifier's head lies in another clause or is
/// a particle; AnnotationError when the sentence is invalid.
ClauseChunks build_chunks(const AnnotatedSentence& sentence, const RuleProfile& profile);

/// Position of a clause-level unit in the intra-clause sequence; lower comes
/// first. Equal ranks keep source order.
int class_rank(const AnnotatedToken& token, const RuleProfile& profile);

/// The token a chunk (identified by its head) is nested under as an
/// argument, if any. Arguments of non-finite forms and other non-verbal
/// governors in the same clause are emitted immediately to the left of the
/// governor's phrase; vocatives, finite verbs, quotative markers and
/// dependents of finite verbs stay at clause level.
std::optional<std::size_t> argument_governor(const AnnotatedSentence& sentence,
                                             std::size_t chunk_head);

/// Orders one clause: vocative, kartr, kārakas in profile order (non-finite
/// groups before the karman or after all kārakas per profile), other,
/// finite verbs with the main verb last, then the quotative marker.
/// `chunks` must partition the clause's non-particle tokens.
/// Throws LinearizeError if two is-main-verb finite verbs share the clause.
std::vector<std::size_t> order_clause(const AnnotatedSentence& sentence, const std::string& clause_id,
                                      std::span<const Chunk> chunks, const RuleProfile& profile);

/// Clause emission order. All clauses ranked: by order_rank. Otherwise the
/// main clause comes last and the others keep source order.
std::vector<std::string> order_clauses(const AnnotatedSentence& sentence);
std::vector<std::string> order_clauses(const AnnotatedSentence& sentence, const RuleProfile& profile);

/// Inserts every particle directly after its head, after particles already
/// attached to the same head (source order, depth first for particles of
/// particles). `order` must hold each non-particle token exactly once.
std::vector<std::size_t> place_particles(std::span<const std::size_t> order,
                                         const AnnotatedSentence& sentence);

/// Full token permutation in canonical prose order.
std::vector<std::size_t> linearize_order(const AnnotatedSentence& sentence, const RuleProfile& profile);

/// Surface forms of linearize_order joined by single spaces.
std::string linearize(const AnnotatedSentence& sentence, const RuleProfile& profile = {});

}  // namespace anvaya
