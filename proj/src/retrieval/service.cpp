#include "toolrange/retrieval/service.hpp"

#include <httplib.h>

#include <stdexcept>

namespace toolrange::retrieval {

Json search_tools_schema() {
    return Json{
        {"type", "object"},
        {"properties",
         Json{{"query", Json{{"type", "string"}, {"description", "natural-language query"}}},
              {"k", Json{{"type", "integer"}, {"minimum", 1},
                         {"description", "number of tools to return"}}}}},
        {"required", Json::array({"query", "k"})},
    };
}

mcp::Dispatcher make_search_dispatcher(const ToolIndex& index) {
    mcp::Dispatcher dispatcher("toolrange-search");
    dispatcher.add_tool(mcp::ServedTool{
        "search_tools",
        "Search the tool universe with a natural-language query; returns the "
        "top-k matching tools as (tool_id, score) pairs.",
        search_tools_schema(),
        [&index](const Json& arguments) {
            const auto query = arguments.at("query").get<std::string>();
            const auto k = arguments.at("k").get<std::int64_t>();
            SearchResult found = index.search(query, static_cast<std::size_t>(k));
            Json results = Json::array();
            for (const auto& hit : found.hits)
                results.push_back(Json{{"tool_id", hit.tool_id}, {"score", hit.score}});
            Json body{{"results", results}};
            if (found.empty_query) body["warning"] = "empty query";
            return registry::ToolResult::make_ok(body.dump());
        },
    });
    return dispatcher;
}

SearchService::SearchService(const ToolIndex& index, const std::string& host, int port)
    : dispatcher_(make_search_dispatcher(index)), server_(std::make_unique<httplib::Server>()) {
    server_->Post("/", [this](const httplib::Request& req, httplib::Response& res) {
        std::string response = dispatcher_.handle_raw(req.body);
        res.set_content(response.empty() ? "{}" : response, "application/json");
    });

    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ <= 0) throw std::runtime_error("search service: bind failed on " + host);
    } else {
        if (!server_->bind_to_port(host, port))
            throw std::runtime_error("search service: cannot bind " + host + ":" +
                                     std::to_string(port));
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

SearchService::~SearchService() { stop(); }

void SearchService::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace toolrange::retrieval
