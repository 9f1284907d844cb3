#include "graphopt/json_io.hpp"

#include <json.hpp>

namespace graphopt {

using nlohmann::ordered_json;

MetricGraph graph_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    try {
        std::vector<Vertex> verts;
        for (const auto& jv : j.at("vertices")) {
            Vertex v;
            v.id = jv.at("id").get<int>();
            std::string role = jv.at("role").get<std::string>();
            if (role == "dirichlet") v.role = VertexRole::dirichlet(jv.at("pin").get<int>());
            else if (role == "free") v.role = VertexRole::free_vertex();
            else throw ParseError("graph JSON: unknown vertex role '" + role + "'");
            verts.push_back(v);
        }
        std::vector<Edge> edges;
        for (const auto& je : j.at("edges")) {
            Edge e;
            e.id = je.at("id").get<int>();
            e.u = je.at("u").get<int>();
            e.v = je.at("v").get<int>();
            e.length = je.at("length").get<double>();
            edges.push_back(e);
        }
        return MetricGraph(std::move(verts), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
}

std::string graph_to_json(const MetricGraph& g) {
    ordered_json j;
    j["vertices"] = ordered_json::array();
    for (const auto& v : g.vertices()) {
        ordered_json jv;
        jv["id"] = v.id;
        if (v.role.is_dirichlet()) {
            jv["role"] = "dirichlet";
            jv["pin"] = v.role.pin;
        } else {
            jv["role"] = "free";
        }
        j["vertices"].push_back(jv);
    }
    j["edges"] = ordered_json::array();
    for (const auto& e : g.edges()) {
        ordered_json je;
        je["id"] = e.id;
        je["u"] = e.u;
        je["v"] = e.v;
        je["length"] = e.length;
        j["edges"].push_back(je);
    }
    return j.dump();
}

}  // namespace graphopt
