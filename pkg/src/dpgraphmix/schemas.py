"""JSON Schemas for the files the command-line tools write.

Kept as plain dictionaries so callers can validate with any Draft 2020-12
implementation without this package depending on one.
"""

_edge_list = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                         "minItems": 2, "maxItems": 2}}

TRACE_DRAW = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["iter", "K", "alpha", "assignments", "graphs"],
    "additionalProperties": False,
    "properties": {
        "iter": {"type": "integer", "minimum": 1},
        "K": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "assignments": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "graphs": {"type": "array", "items": _edge_list, "minItems": 1},
    },
}

TRACE_META = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["meta"],
    "properties": {"meta": {
        "type": "object",
        "required": ["n", "q", "draws", "seed", "graph_moves_proposed", "graph_moves_accepted",
                     "acceptance_rate"],
        "properties": {
            "n": {"type": "integer", "minimum": 1},
            "q": {"type": "integer", "minimum": 1},
            "draws": {"type": "integer", "minimum": 0},
            "seed": {"type": ["integer", "null"]},
            "graph_moves_proposed": {"type": "integer", "minimum": 0},
            "graph_moves_accepted": {"type": "integer", "minimum": 0},
            "acceptance_rate": {"type": "number", "minimum": 0, "maximum": 1},
        },
    }},
}

FIT_META = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["config", "chains", "wall_time_seconds"],
    "properties": {
        "config": {"type": "object"},
        "wall_time_seconds": {"type": "number", "minimum": 0},
        "chains": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["trace", "seed", "draws", "acceptance_rate"],
            "properties": {
                "trace": {"type": "string"},
                "seed": {"type": "integer"},
                "draws": {"type": "integer", "minimum": 0},
                "acceptance_rate": {"type": "number", "minimum": 0, "maximum": 1},
            },
        }},
    },
}

TRUTH_GRAPHS = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["q", "graphs"],
    "properties": {
        "q": {"type": "integer", "minimum": 1},
        "graphs": {"type": "array", "items": {
            "type": "object", "required": ["q", "edges"],
            "properties": {"q": {"type": "integer"}, "edges": _edge_list},
        }},
    },
}
