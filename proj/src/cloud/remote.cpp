// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "xcap/cloud/clients.hpp"
#include "xcap/error.hpp"
#include "xcap/model/codec.hpp"

#include <httplib.h>

namespace xcap::cloud {

using nlohmann::json;

namespace {

json post(const std::string& host, int port, const std::string& path, const json& body) {
  httplib::Client cli(host, port);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(60);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) throw IoError("model service " + host + ":" + std::to_string(port) + path + ": " +
                          httplib::to_string(res.error()));
  if (res->status != 200)
    throw IoError("model service " + path + ": HTTP " + std::to_string(res->status) + " " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ParseError("model service " + path + ": " + e.what());
  }
}

}  // namespace

FloatImage RemoteDepthClient::predict(const RgbImage& rgb) {
  const json r = post(host_, port_, "/predict_depth", {{"png", model::base64_encode(model::encode_png(rgb))}});
  try {
    FloatImage out(r.at("width").get<int>(), r.at("height").get<int>(), 1, 0.0f);
    const auto& d = r.at("depth");
    if (d.size() != out.pixels.size()) throw ParseError("/predict_depth: depth length mismatch");
    for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = d[i].get<float>();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("/predict_depth: ") + e.what());
  }
}

std::vector<MaskProposal> RemoteSegmenterClient::segment(const RgbImage& rgb, std::span<const Pixel> points) {
  json pts = json::array();
  for (const auto& p : points) pts.push_back({p.u, p.v});
  const json r = post(host_, port_, "/segment",
                      {{"png", model::base64_encode(model::encode_png(rgb))}, {"points", pts}});
  std::vector<MaskProposal> out;
  try {
    for (const auto& m : r.at("masks")) out.push_back(make_proposal(rle_decode(m)));
  } catch (const json::exception& e) {
    throw ParseError(std::string("/segment: ") + e.what());
  }
  return out;
}

struct ModelServer::Impl {
  httplib::Server server;
  DepthPredictorClient& depth;
  SegmenterClient& seg;
  std::mutex mu;  // local clients are not required to be thread-safe
  Impl(DepthPredictorClient& d, SegmenterClient& s) : depth(d), seg(s) {}
};

namespace {

template <typename F>
void handle(const httplib::Request& req, httplib::Response& res, F&& body) {
  try {
    const json in = json::parse(req.body);
    res.set_content(body(in).dump(), "application/json");
  } catch (const std::exception& e) {
    res.status = 400;
    res.set_content(json{{"error", e.what()}}.dump(), "application/json");
  }
}

}  // namespace

ModelServer::ModelServer(DepthPredictorClient& depth, SegmenterClient& seg)
    : impl_(std::make_unique<Impl>(depth, seg)) {
  impl_->server.Post("/predict_depth", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [this](const json& in) {
      const RgbImage rgb = model::decode_png_rgb(model::base64_decode(in.at("png").get<std::string>()));
      FloatImage d;
      {
        std::lock_guard lock(impl_->mu);
        d = impl_->depth.predict(rgb);
      }
      return json{{"width", d.width}, {"height", d.height}, {"depth", d.pixels}};
    });
  });
  impl_->server.Post("/segment", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [this](const json& in) {
      const RgbImage rgb = model::decode_png_rgb(model::base64_decode(in.at("png").get<std::string>()));
      std::vector<Pixel> pts;
      for (const auto& p : in.at("points")) pts.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
      std::vector<MaskProposal> props;
      {
        std::lock_guard lock(impl_->mu);
        props = impl_->seg.segment(rgb, pts);
      }
      json masks = json::array();
      for (const auto& p : props) masks.push_back(rle_encode(p.mask));
      return json{{"masks", masks}};
    });
  });
}

ModelServer::~ModelServer() { stop(); }

int ModelServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw IoError("model server: cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw IoError("model server: cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ModelServer::listen() { impl_->server.listen_after_bind(); }

void ModelServer::stop() { impl_->server.stop(); }

}  // namespace xcap::cloud
