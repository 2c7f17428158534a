#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psbfem/model.hpp"

namespace psb {

// Input-deck ingestion. The accepted subset is exactly four keywords:
// *USER ELEMENT, *NODE, *ELEMENT, *UEL PROPERTY. Keyword matching is
// case-insensitive, records are comma-separated, lines starting with `**`
// are comments. Anything else is reported, never guessed at.
//
// parse_inp itself never throws: every structural problem becomes a
// diagnostic with a 1-based line number. deck_to_model raises the first
// error-level diagnostic (and its own construction errors) as exceptions.

struct DeckDiagnostic {
    bool is_error = false;  // errors block deck_to_model; warnings do not
    int line = -1;
    std::string message;
};

struct DeckUserElement {
    std::string type;  // e.g. "U5"
    int nodes = 0;
    int properties = 0;
    int coordinates = 0;
    std::vector<int> active_dofs;  // data line(s); validated, otherwise unused
    int line = -1;
};

struct DeckNode {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    int line = -1;
};

struct DeckElement {
    int id = 0;
    std::vector<int> node_ids;
    int line = -1;
};

struct DeckElementBlock {
    std::string type;   // Un tag; n must equal each record's node count
    std::string elset;  // set name the records belong to
    std::vector<DeckElement> elements;
    int line = -1;
};

struct DeckProperty {
    std::string elset;
    std::vector<double> values;  // (kx, ky); deck_to_model requires exactly two
    int line = -1;
};

struct DeckModel {
    std::vector<DeckUserElement> user_elements;
    std::vector<DeckNode> nodes;
    std::vector<DeckElementBlock> element_blocks;
    std::vector<DeckProperty> properties;
    std::vector<DeckDiagnostic> diagnostics;

    bool ok() const;  // true when no error-level diagnostic was recorded
    std::string first_error() const;
};

DeckModel parse_inp(const std::string& text);

// Everything a deck cannot express and must be supplied alongside it.
struct DeckOverlay {
    double Ss = 0.0;  // applied to every material
    std::vector<DirichletSet> dirichlet;
    std::vector<FluxSet> flux;
    std::map<std::string, Schedule> schedules;
    std::optional<TransientSpec> transient;
    std::vector<MonitorPoint> monitors;
    std::string unit_note;
};

// Property pair order is (kx, ky). Element type tags are dropped in favor of
// the per-element node counts. Material ids are assigned 1..N in property
// record order. The returned model is fully validated.
SeepageModel deck_to_model(const DeckModel& deck, const DeckOverlay& overlay);

}  // namespace psb
