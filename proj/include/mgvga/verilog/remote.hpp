/*
 * Copyright 2026 The mgvga Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


/*!
  \file remote.hpp
  \brief HTTP embedding provider client with an on-disk cache

  Wire contract: `POST {endpoint}/embed` with body
  `{"model": ..., "input": ...}`; the reply is `{"embeddings": [[...], ...]}`
  with one inner list per token. Responses are cached under
  `sha256(model NUL source).json`, and a cache hit never touches the network.
*/

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "embedding.hpp"
#include "../util/hash.hpp"

namespace mgvga
{

enum class embed_error_kind
{
  configuration,
  transport,
  http_status,
  malformed_payload,
  empty_embedding
};

class embed_error : public std::runtime_error
{
public:
  embed_error( embed_error_kind kind, std::string const& msg, int status = 0 )
      : std::runtime_error( msg ), kind_( kind ), status_( status )
  {
  }
  embed_error_kind kind() const { return kind_; }
  int status() const { return status_; }

private:
  embed_error_kind kind_;
  int status_;
};

struct remote_embed_config
{
  std::string endpoint;  /* e.g. http://127.0.0.1:8080 or http://host/v1 */
  std::string model{ "gte-Qwen2-7B-instruct" };
  std::string token;     /* bearer token, optional */
  std::filesystem::path cache_dir;
  std::chrono::milliseconds timeout{ 60000 };

  /*! \brief Fills endpoint and token from MGVGA_EMBED_ENDPOINT / MGVGA_EMBED_TOKEN when unset. */
  void apply_environment()
  {
    if ( endpoint.empty() )
    {
      if ( const char* e = std::getenv( "MGVGA_EMBED_ENDPOINT" ) )
      {
        endpoint = e;
      }
    }
    if ( token.empty() )
    {
      if ( const char* t = std::getenv( "MGVGA_EMBED_TOKEN" ) )
      {
        token = t;
      }
    }
  }
};

struct remote_embed_stats
{
  std::atomic<std::size_t> network_calls{ 0 };
  std::atomic<std::size_t> cache_hits{ 0 };
};

namespace detail
{

inline std::mutex& embed_cache_mutex()
{
  static std::mutex m;
  return m;
}

inline token_embeddings embeddings_from_json( nlohmann::json const& j, std::string const& model, std::string const& provider )
{
  if ( !j.is_object() || !j.contains( "embeddings" ) || !j["embeddings"].is_array() )
  {
    throw embed_error( embed_error_kind::malformed_payload, "response lacks an 'embeddings' array" );
  }
  auto const& rows = j["embeddings"];
  if ( rows.empty() )
  {
    throw embed_error( embed_error_kind::empty_embedding, "provider returned zero token embeddings" );
  }
  const auto width = rows[0].is_array() ? rows[0].size() : 0;
  if ( width == 0 )
  {
    throw embed_error( embed_error_kind::malformed_payload, "embedding rows must be non-empty arrays" );
  }
  token_embeddings e;
  e.provider = provider;
  e.model = model;
  e.values.resize( static_cast<Eigen::Index>( rows.size() ), static_cast<Eigen::Index>( width ) );
  for ( std::size_t r = 0; r < rows.size(); ++r )
  {
    if ( !rows[r].is_array() || rows[r].size() != width )
    {
      throw embed_error( embed_error_kind::malformed_payload, "embedding rows have inconsistent widths" );
    }
    for ( std::size_t c = 0; c < width; ++c )
    {
      if ( !rows[r][c].is_number() )
      {
        throw embed_error( embed_error_kind::malformed_payload, "embedding values must be numbers" );
      }
      e.values( static_cast<Eigen::Index>( r ), static_cast<Eigen::Index>( c ) ) = rows[r][c].get<float>();
    }
  }
  return e;
}

/*! \brief Splits "http://host:port/prefix" into the client base and the request path. */
inline std::pair<std::string, std::string> split_endpoint( std::string const& endpoint )
{
  const auto scheme = endpoint.find( "://" );
  const auto path_start = endpoint.find( '/', scheme == std::string::npos ? 0 : scheme + 3 );
  std::string base = path_start == std::string::npos ? endpoint : endpoint.substr( 0, path_start );
  std::string prefix = path_start == std::string::npos ? std::string() : endpoint.substr( path_start );
  while ( !prefix.empty() && prefix.back() == '/' )
  {
    prefix.pop_back();
  }
  return { base, prefix + "/embed" };
}

} // namespace detail

/*! \brief Cache file for (model, source). */
inline std::filesystem::path embed_cache_path( remote_embed_config const& cfg, std::string_view source )
{
  std::string key = cfg.model;
  key.push_back( '\0' );
  key.append( source );
  return cfg.cache_dir / ( sha256_hex( key ) + ".json" );
}

inline token_embeddings embed_remote( std::string_view source, remote_embed_config const& cfg, remote_embed_stats* stats = nullptr )
{
  if ( source.empty() )
  {
    throw embed_error( embed_error_kind::configuration, "cannot embed an empty source" );
  }
  std::optional<std::filesystem::path> cache_file;
  if ( !cfg.cache_dir.empty() )
  {
    cache_file = embed_cache_path( cfg, source );
    std::lock_guard lock( detail::embed_cache_mutex() );
    if ( std::filesystem::exists( *cache_file ) )
    {
      const auto j = nlohmann::json::parse( read_file( *cache_file ), nullptr, false );
      if ( !j.is_discarded() )
      {
        if ( stats )
        {
          ++stats->cache_hits;
        }
        return detail::embeddings_from_json( j, j.value( "model", cfg.model ), j.value( "provider", "remote" ) );
      }
    }
  }
  if ( cfg.endpoint.empty() )
  {
    throw embed_error( embed_error_kind::configuration, "no embedding endpoint configured (set MGVGA_EMBED_ENDPOINT)" );
  }

  const auto [base, path] = detail::split_endpoint( cfg.endpoint );
  httplib::Client client( base );
  if ( !client.is_valid() )
  {
    throw embed_error( embed_error_kind::configuration, "unsupported embedding endpoint '" + cfg.endpoint + "'" );
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>( cfg.timeout );
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>( cfg.timeout - secs );
  client.set_connection_timeout( secs.count(), static_cast<time_t>( usecs.count() ) );
  client.set_read_timeout( secs.count(), static_cast<time_t>( usecs.count() ) );
  if ( !cfg.token.empty() )
  {
    client.set_bearer_token_auth( cfg.token );
  }
  const nlohmann::json body = { { "model", cfg.model }, { "input", std::string( source ) } };
  if ( stats )
  {
    ++stats->network_calls;
  }
  const auto res = client.Post( path, body.dump(), "application/json" );
  if ( !res )
  {
    throw embed_error( embed_error_kind::transport, "embedding request failed: " + httplib::to_string( res.error() ) );
  }
  if ( res->status < 200 || res->status >= 300 )
  {
    throw embed_error( embed_error_kind::http_status, "embedding service returned HTTP " + std::to_string( res->status ), res->status );
  }
  const auto j = nlohmann::json::parse( res->body, nullptr, false );
  if ( j.is_discarded() )
  {
    throw embed_error( embed_error_kind::malformed_payload, "embedding response is not valid JSON" );
  }
  auto e = detail::embeddings_from_json( j, cfg.model, "remote:" + base );

  if ( cache_file )
  {
    nlohmann::json cached = { { "model", e.model }, { "provider", e.provider }, { "embeddings", j["embeddings"] } };
    std::lock_guard lock( detail::embed_cache_mutex() );
    write_file_atomic( *cache_file, cached.dump() );
  }
  return e;
}

/*! \brief Embeds many sources with at most `max_in_flight` concurrent requests; results keep input order. */
inline std::vector<token_embeddings> embed_remote_all( std::vector<std::string> const& sources, remote_embed_config const& cfg,
                                                       std::size_t max_in_flight = 4, remote_embed_stats* stats = nullptr )
{
  std::vector<token_embeddings> out( sources.size() );
  std::vector<std::exception_ptr> errors( sources.size() );
  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for ( auto i = next++; i < sources.size(); i = next++ )
    {
      try
      {
        out[i] = embed_remote( sources[i], cfg, stats );
      }
      catch ( ... )
      {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto workers = std::max<std::size_t>( 1, std::min( max_in_flight, sources.size() ) );
  for ( std::size_t k = 0; k < workers; ++k )
  {
    pool.emplace_back( worker );
  }
  for ( auto& th : pool )
  {
    th.join();
  }
  for ( auto const& e : errors )
  {
    if ( e )
    {
      std::rethrow_exception( e );
    }
  }
  return out;
}

} // namespace mgvga
