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
  \file mgvga.cpp
  \brief Command-line entry point

  Exit codes: 0 on success, 1 on a domain error, 2 on a usage or
  configuration error. Every run writes `resolved_config.toml` into the
  output directory, which is assembled under a temporary name and renamed
  into place when the command succeeds.
*/

#include <CLI11.hpp>
#include <json.hpp>

#include <mgvga/aig/aiger.hpp>
#include <mgvga/aig/cone.hpp>
#include <mgvga/aig/random_aig.hpp>
#include <mgvga/aig/simulation.hpp>
#include <mgvga/data/dataset.hpp>
#include <mgvga/eval/equivalence.hpp>
#include <mgvga/eval/qor.hpp>
#include <mgvga/exact/bench.hpp>
#include <mgvga/exact/bounds.hpp>
#include <mgvga/train/trainer.hpp>
#include <mgvga/util/svg_plot.hpp>
#include <mgvga/verilog/embedding.hpp>
#include <mgvga/verilog/remote.hpp>

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mgvga;

namespace
{

class usage_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct global_flags
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out{ "mgvga_out" };
  std::optional<std::size_t> jobs;
  std::string tool_abc;
  std::string tool_yosys;
  std::string embed_endpoint;
  bool verbose{ false };
};

struct run_context
{
  kv_config cfg;
  std::uint64_t seed{ 0 };
  std::size_t jobs{ 1 };
  bool verbose{ false };
  fs::path out;     /* staging directory; everything is written here */
  fs::path final_out;

  /* path as the user will see it once the output is committed */
  std::string shown( fs::path const& p ) const
  {
    const auto rel = p.lexically_relative( out );
    if ( rel.empty() || *rel.begin() == ".." )
    {
      return p.string();
    }
    return ( final_out / rel ).string();
  }

  void log( std::string const& msg ) const
  {
    if ( verbose )
    {
      std::cerr << msg << '\n';
    }
  }
};

kv_config load_config( global_flags const& f, std::set<std::string>& from_flags )
{
  kv_config cfg;
  if ( !f.config.empty() )
  {
    if ( !fs::exists( f.config ) )
    {
      throw config_error( "config file '" + f.config + "' does not exist" );
    }
    cfg = kv_config::parse( read_file( f.config ) );
  }
  if ( !f.tool_abc.empty() )
  {
    cfg.set( "tools.abc", f.tool_abc );
    from_flags.insert( "tools.abc" );
  }
  if ( !f.tool_yosys.empty() )
  {
    cfg.set( "tools.yosys", f.tool_yosys );
    from_flags.insert( "tools.yosys" );
  }
  if ( !f.embed_endpoint.empty() )
  {
    cfg.set( "embed.endpoint", f.embed_endpoint );
    from_flags.insert( "embed.endpoint" );
  }
  if ( f.seed )
  {
    // the flag is the single source of randomness; it overrides every seeded section
    for ( auto const* key : { "run.seed", "train.seed", "data.seed", "eval.seed", "embed.seed" } )
    {
      cfg.set( key, std::to_string( *f.seed ) );
      from_flags.insert( key );
    }
  }
  if ( f.jobs )
  {
    cfg.set( "run.jobs", std::to_string( *f.jobs ) );
    from_flags.insert( "run.jobs" );
  }
  return cfg;
}

/* Moves the staging directory into place; existing entries of the same name are replaced. */
void commit_output( fs::path const& staging, fs::path const& final_out )
{
  if ( !fs::exists( final_out ) )
  {
    if ( final_out.has_parent_path() )
    {
      fs::create_directories( final_out.parent_path() );
    }
    fs::rename( staging, final_out );
    return;
  }
  for ( auto const& e : fs::directory_iterator( staging ) )
  {
    const auto dst = final_out / e.path().filename();
    fs::remove_all( dst );
    fs::rename( e.path(), dst );
  }
  fs::remove_all( staging );
}

aig_graph read_graph( fs::path const& p )
{
  if ( !fs::exists( p ) )
  {
    throw std::runtime_error( "input '" + p.string() + "' does not exist" );
  }
  if ( p.extension() == ".json" )
  {
    return graph_from_json( nlohmann::json::parse( read_file( p ) ) );
  }
  auto g = read_aiger_file( p );
  if ( g.name.empty() )
  {
    g.name = p.stem().string();
  }
  return g;
}

void write_graph( aig_graph const& g, fs::path const& p )
{
  if ( p.has_parent_path() )
  {
    fs::create_directories( p.parent_path() );
  }
  const auto ext = p.extension().string();
  if ( ext == ".json" )
  {
    write_file_atomic( p, to_json( g ).dump( 2 ) + "\n" );
  }
  else if ( ext == ".aig" )
  {
    write_file_atomic( p, write_aiger( g, aiger_format::binary ) );
  }
  else if ( ext == ".aag" )
  {
    write_file_atomic( p, write_aiger( g, aiger_format::ascii ) );
  }
  else
  {
    throw usage_error( "output '" + p.string() + "' needs a .aag, .aig or .json extension" );
  }
}

/* Files as given; directories contribute their files with one of `exts`, sorted. */
std::vector<fs::path> expand_inputs( std::vector<std::string> const& inputs, std::vector<std::string> const& exts )
{
  std::vector<fs::path> out;
  for ( auto const& s : inputs )
  {
    const fs::path p( s );
    if ( fs::is_directory( p ) )
    {
      std::vector<fs::path> found;
      for ( auto const& e : fs::directory_iterator( p ) )
      {
        if ( e.is_regular_file() && std::find( exts.begin(), exts.end(), e.path().extension().string() ) != exts.end() )
        {
          found.push_back( e.path() );
        }
      }
      std::sort( found.begin(), found.end() );
      out.insert( out.end(), found.begin(), found.end() );
    }
    else if ( fs::exists( p ) )
    {
      out.push_back( p );
    }
    else
    {
      throw std::runtime_error( "input '" + s + "' does not exist" );
    }
  }
  return out;
}

fs::path manifest_path( fs::path const& p ) { return fs::is_directory( p ) ? p / "manifest.jsonl" : p; }

void write_json( fs::path const& p, nlohmann::json const& j ) { write_file_atomic( p, j.dump( 2 ) + "\n" ); }

/* ---- embeddings ---- */

struct embed_settings
{
  std::string provider{ "local" };
  std::uint32_t d_v{ 256 };
  std::uint64_t seed{ 0 };
  std::int64_t pool_m{ 16 };
  remote_embed_config remote;
};

embed_settings embed_from( run_context& ctx, std::uint32_t d_v )
{
  embed_settings e;
  e.provider = ctx.cfg.get_string( "embed.provider", e.provider );
  if ( e.provider != "local" && e.provider != "remote" )
  {
    throw config_error( "embed.provider must be local or remote, got '" + e.provider + "'" );
  }
  e.d_v = static_cast<std::uint32_t>( ctx.cfg.get_int( "embed.d_v", d_v ) );
  e.seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "embed.seed", static_cast<std::int64_t>( ctx.seed ) ) );
  e.pool_m = ctx.cfg.get_int( "embed.pool_m", e.pool_m );
  e.remote.endpoint = ctx.cfg.get_string( "embed.endpoint", "" );
  e.remote.model = ctx.cfg.get_string( "embed.model", e.remote.model );
  e.remote.cache_dir = ctx.cfg.get_string( "embed.cache_dir", "mgvga-cache/embed" );
  e.remote.timeout = std::chrono::milliseconds( static_cast<std::int64_t>( ctx.cfg.get_double( "embed.timeout_s", 60.0 ) * 1000.0 ) );
  e.remote.apply_environment();
  return e;
}

std::vector<token_embeddings> embed_sources( std::vector<std::string> const& sources, embed_settings const& e, std::size_t jobs )
{
  if ( e.provider == "local" )
  {
    std::vector<token_embeddings> out;
    for ( auto const& s : sources )
    {
      out.push_back( embed_local( s, e.d_v, e.seed ) );
    }
    return out;
  }
  return embed_remote_all( sources, e.remote, std::max<std::size_t>( 1, jobs ) );
}

/* ---- aig ---- */

int aig_convert( run_context&, std::string const& in, std::string const& out )
{
  if ( fs::exists( out ) && fs::equivalent( in, out ) )
  {
    throw usage_error( "refusing to overwrite the input file" );
  }
  const auto g = read_graph( in );
  write_graph( g, out );
  std::cout << "wrote " << out << " (" << g.pis.size() << " PIs, " << g.pos.size() << " POs, " << g.count( node_type::and_gate )
            << " ANDs, " << g.count( node_type::not_gate ) << " NOTs)\n";
  return 0;
}

int aig_validate( run_context& ctx, std::string const& in )
{
  const auto g = read_graph( in );
  const auto rep = validate( g );
  nlohmann::json j{ { "file", in }, { "ok", rep.ok() }, { "nodes", g.size() }, { "violations", nlohmann::json::array() } };
  for ( auto const& v : rep.violations )
  {
    std::cout << to_string( v.kind ) << ( v.node ? " node " + std::to_string( *v.node ) : std::string() ) << ": " << v.message << '\n';
    j["violations"].push_back( { { "kind", to_string( v.kind ) }, { "message", v.message } } );
  }
  write_json( ctx.out / "validation.json", j );
  std::cout << ( rep.ok() ? "valid" : "invalid" ) << ": " << g.pis.size() << " PIs, " << g.pos.size() << " POs, "
            << g.count( node_type::and_gate ) << " ANDs, " << g.count( node_type::not_gate ) << " NOTs\n";
  return rep.ok() ? 0 : 1;
}

int aig_equiv( run_context& ctx, std::string const& a, std::string const& b, bool by_name, std::uint64_t samples )
{
  const auto g1 = read_graph( a );
  const auto g2 = read_graph( b );
  const bool exhaustive = samples == 0 && g1.pis.size() <= max_exhaustive_inputs;
  const auto mode = exhaustive ? simulation_mode::exhaustive()
                               : simulation_mode::sampled( samples ? samples : 10000, derive_seed( ctx.seed, 0xe9 ) );
  const auto r = equivalent( g1, g2, mode, by_name ? terminal_matching::by_name : terminal_matching::positional );
  nlohmann::json j{ { "first", a }, { "second", b }, { "mode", exhaustive ? "exhaustive" : "sampled" } };
  switch ( r.verdict )
  {
  case equivalence_verdict::equivalent:
    std::cout << "equivalent\n";
    j["verdict"] = "equivalent";
    break;
  case equivalence_verdict::inequivalent:
    std::cout << "inequivalent: output " << r.failing_output << " differs under inputs " << r.witness_string() << '\n';
    j["verdict"] = "inequivalent";
    j["witness"] = r.witness_string();
    j["failing_output"] = r.failing_output;
    break;
  case equivalence_verdict::unknown:
    std::cout << "unknown: no difference in " << mode.samples << " samples\n";
    j["verdict"] = "unknown";
    break;
  }
  write_json( ctx.out / "verdict.json", j );
  return 0;
}

int aig_cone( run_context& ctx, std::string const& in, node_id root, std::string output )
{
  const auto g = read_graph( in );
  const auto c = extract_cone( g, root );
  if ( output.empty() )
  {
    output = ( ctx.out / ( "cone_" + std::to_string( root ) + ".aag" ) ).string();
  }
  write_graph( c.extracted, output );
  std::cout << "cone of node " << root << ": " << c.members.size() << " nodes, " << c.extracted.pis.size() << " PIs -> " << ctx.shown( output ) << '\n';
  return 0;
}

int aig_random( run_context& ctx, std::uint32_t pis, std::uint32_t gates, double and_p, std::string output )
{
  const auto g = random_aig( pis, gates, ctx.seed, and_p );
  if ( output.empty() )
  {
    output = ( ctx.out / "random.aag" ).string();
  }
  write_graph( g, output );
  std::cout << "wrote " << ctx.shown( output ) << " (" << g.size() << " nodes)\n";
  return 0;
}

/* ---- data ---- */

int data_sequences( run_context& ctx, std::size_t count, std::size_t length )
{
  dataset_manifest m;
  m.sequences = sample_sequences( count, length, derive_seed( ctx.cfg.get_int( "data.seed", 0 ), 0x5e9 ) );
  write_file_atomic( ctx.out / "sequences.jsonl", m.to_jsonl() );
  std::string scripts;
  for ( auto const& s : m.sequences )
  {
    scripts += std::to_string( s.id ) + "\t" + to_script( s ) + "\n";
  }
  write_file_atomic( ctx.out / "sequences.txt", scripts );
  std::cout << "wrote " << count << " sequences of length " << length << '\n';
  return 0;
}

int data_build( run_context& ctx, std::vector<std::string> const& inputs, std::string const& seq_file, std::size_t count,
                std::size_t length, bool store, double eval_fraction, bool verify )
{
  const auto tools = tool_config::from( ctx.cfg );
  std::vector<opt_sequence> seqs;
  if ( !seq_file.empty() )
  {
    seqs = load_manifest( manifest_path( seq_file ) ).sequences;
    if ( seqs.empty() )
    {
      throw std::runtime_error( "no sequences in '" + seq_file + "'" );
    }
  }
  else
  {
    seqs = sample_sequences( count, length, derive_seed( ctx.cfg.get_int( "data.seed", 0 ), 0x5e9 ) );
  }
  dataset_options opts;
  opts.store_intermediate = ctx.cfg.get_bool( "data.store_intermediate", store );
  opts.jobs = ctx.jobs;
  opts.eval_fraction = ctx.cfg.get_double( "data.eval_fraction", eval_fraction );
  opts.seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "data.seed", 0 ) );
  opts.verify = ctx.cfg.get_bool( "data.verify", verify );
  const auto designs = expand_inputs( inputs, { ".aag", ".aig" } );
  if ( designs.empty() )
  {
    throw usage_error( "no design files given" );
  }
  const auto m = build_dataset( designs, seqs, tools, ctx.out, opts );
  const auto ok_d = std::count_if( m.designs.begin(), m.designs.end(), []( auto const& d ) { return d.ok; } );
  const auto ok_l = std::count_if( m.labels.begin(), m.labels.end(), []( auto const& l ) { return l.ok; } );
  std::cout << "designs: " << ok_d << " ok, " << m.designs.size() - ok_d << " failed; labels: " << ok_l << " ok, "
            << m.labels.size() - ok_l << " failed\n";
  return 0;
}

int data_pair( run_context& ctx, std::string const& corpus )
{
  const auto tools = tool_config::from( ctx.cfg );
  dataset_manifest m;
  m.pairs = pair_verilog_aig( corpus, tools, ctx.out, ctx.jobs );
  write_manifest( ctx.out, m );
  const auto ok = std::count_if( m.pairs.begin(), m.pairs.end(), []( auto const& p ) { return p.ok; } );
  std::cout << "pairs: " << ok << " ok, " << m.pairs.size() - ok << " failed\n";
  return 0;
}

/* ---- embed ---- */

int embed_files( run_context& ctx, std::vector<std::string> const& inputs, bool remote )
{
  auto e = embed_from( ctx, static_cast<std::uint32_t>( ctx.cfg.get_int( "model.d_v", 256 ) ) );
  e.provider = remote ? "remote" : "local";
  if ( remote && e.remote.endpoint.empty() )
  {
    throw config_error( "no embedding endpoint: pass --embed-endpoint or set MGVGA_EMBED_ENDPOINT" );
  }
  const auto files = expand_inputs( inputs, { ".v", ".sv" } );
  std::vector<std::string> sources;
  for ( auto const& f : files )
  {
    sources.push_back( read_file( f ) );
  }
  const auto embs = embed_sources( sources, e, ctx.jobs );
  fs::create_directories( ctx.out / "embeddings" );
  for ( std::size_t i = 0; i < files.size(); ++i )
  {
    const auto pooled = adaptive_pool( embs[i], e.pool_m );
    nlohmann::json j{ { "source", files[i].string() },
                      { "provider", embs[i].provider },
                      { "model", embs[i].model },
                      { "num_tokens", embs[i].num_tokens() },
                      { "dim", embs[i].dim() },
                      { "pooled", nlohmann::json::array() } };
    for ( Eigen::Index r = 0; r < pooled.rows(); ++r )
    {
      j["pooled"].push_back( std::vector<float>( pooled.row( r ).data(), pooled.row( r ).data() + pooled.cols() ) );
    }
    write_json( ctx.out / "embeddings" / ( files[i].stem().string() + ".json" ), j );
    std::cout << files[i].string() << ": " << embs[i].num_tokens() << " tokens x " << embs[i].dim() << " -> " << pooled.rows() << " x "
              << pooled.cols() << '\n';
  }
  return 0;
}

/* ---- train ---- */

std::vector<train_sample> training_samples( run_context& ctx, std::vector<std::string> const& inputs, std::uint32_t d_v )
{
  std::vector<train_sample> data;
  std::vector<std::string> sources;
  std::vector<std::size_t> paired;
  for ( auto const& in : inputs )
  {
    const fs::path p( in );
    if ( fs::is_directory( p ) || p.extension() == ".jsonl" )
    {
      const auto mp = manifest_path( p );
      const auto root = mp.parent_path();
      const auto m = load_manifest( mp );
      for ( auto const& d : m.designs )
      {
        if ( d.ok && d.split != "eval" )
        {
          data.push_back( { d.id, read_aiger_file( root / d.path ), std::nullopt, false } );
        }
      }
      for ( auto const& pr : m.pairs )
      {
        if ( pr.ok )
        {
          paired.push_back( data.size() );
          const fs::path vp( pr.verilog );
          sources.push_back( read_file( vp.is_relative() && !fs::exists( vp ) ? root / vp : vp ) );
          data.push_back( { fs::path( pr.verilog ).stem().string(), read_aiger_file( root / pr.aig ), std::nullopt, false } );
        }
      }
    }
    else
    {
      for ( auto const& f : expand_inputs( { in }, { ".aag", ".aig" } ) )
      {
        data.push_back( { f.stem().string(), read_graph( f ), std::nullopt, false } );
      }
    }
  }
  if ( !sources.empty() )
  {
    auto e = embed_from( ctx, d_v );
    const auto embs = embed_sources( sources, e, ctx.jobs );
    for ( std::size_t i = 0; i < paired.size(); ++i )
    {
      if ( embs[i].dim() != d_v )
      {
        throw config_error( "embedding width " + std::to_string( embs[i].dim() ) + " does not match model.d_v = " + std::to_string( d_v ) );
      }
      data[paired[i]].verilog = adaptive_pool( embs[i], e.pool_m );
    }
  }
  return data;
}

int train_mgvga( run_context& ctx, std::vector<std::string> const& inputs )
{
  ctx.cfg.set( "train.seed", std::to_string( ctx.cfg.get_int( "train.seed", static_cast<std::int64_t>( ctx.seed ) ) ) );
  const auto cfg = train_config::from( ctx.cfg );
  const auto data = training_samples( ctx, inputs, cfg.model.d_v );
  if ( data.empty() )
  {
    throw usage_error( "no training graphs given" );
  }
  train_options opts;
  opts.out_dir = ctx.out;
  opts.on_step = [&]( metrics_row const& r ) {
    ctx.log( "step " + std::to_string( r.step ) + " epoch " + std::to_string( r.epoch ) + " L = " + std::to_string( r.l_mgvga ) );
  };
  const auto res = train( data, cfg, opts );

  plot_series mgm{ "L_mgm", {}, {} }, vga{ "L_vga", {}, {} }, both{ "L_mgvga", {}, {} };
  for ( auto const& r : res.metrics )
  {
    mgm.x.push_back( static_cast<double>( r.step ) );
    mgm.y.push_back( r.l_mgm );
    vga.x.push_back( static_cast<double>( r.step ) );
    vga.y.push_back( r.l_vga );
    both.x.push_back( static_cast<double>( r.step ) );
    both.y.push_back( r.l_mgvga );
  }
  write_file_atomic( ctx.out / "loss.svg", svg_line_plot( { both, mgm, vga }, { "training loss", "step", "loss" } ) );
  if ( !res.metrics.empty() )
  {
    auto const& last = res.metrics.back();
    std::cout << res.steps << " steps over " << data.size() << " graphs; final L_mgvga " << last.l_mgvga << ", masked type accuracy "
              << last.masked_type_accuracy << '\n';
  }
  if ( !res.flagged.empty() )
  {
    std::cout << res.flagged.size() << " graphs trained without a Verilog embedding\n";
  }
  return 0;
}

/* ---- eval ---- */

int eval_qor( run_context& ctx, std::string const& model, std::string const& data_dir )
{
  auto tm = load_trained_model( model );
  auto qc = qor_config::from( ctx.cfg );
  qc.seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "eval.seed", static_cast<std::int64_t>( ctx.seed ) ) );
  const auto len = static_cast<std::size_t>( ctx.cfg.get_int( "qor.sequence_length", static_cast<std::int64_t>( default_sequence_length ) ) );
  const auto mp = manifest_path( data_dir );
  const auto m = load_manifest( mp );
  const auto train_set = qor_dataset_from_manifest( m, mp.parent_path(), "train", tm.params, tm.config, qc.pooling, len );
  const auto fit = train_qor_head( train_set, qc );
  const auto train_rep = evaluate_qor( fit.head, train_set );
  write_file_atomic( ctx.out / "qor_train.csv", train_rep.to_csv() );
  nlohmann::json summary{ { "train", train_rep.to_json() }, { "train_mse", fit.final_mse } };
  const bool has_eval = std::any_of( m.designs.begin(), m.designs.end(), []( auto const& d ) { return d.ok && d.split == "eval"; } );
  if ( has_eval )
  {
    const auto eval_set = qor_dataset_from_manifest( m, mp.parent_path(), "eval", tm.params, tm.config, qc.pooling, len );
    const auto eval_rep = evaluate_qor( fit.head, eval_set );
    write_file_atomic( ctx.out / "qor_eval.csv", eval_rep.to_csv() );
    summary["eval"] = eval_rep.to_json();
    std::cout << "eval: NDCG@3 " << eval_rep.mean.ndcg3 << ", NDCG@5 " << eval_rep.mean.ndcg5 << ", Top-3% " << eval_rep.mean.top3 << ", Top-5% "
              << eval_rep.mean.top5 << ", Top-10% " << eval_rep.mean.top10 << '\n';
  }
  write_json( ctx.out / "qor_summary.json", summary );
  plot_series loss{ "head MSE", {}, fit.loss };
  for ( std::size_t i = 0; i < fit.loss.size(); ++i )
  {
    loss.x.push_back( static_cast<double>( i ) );
  }
  write_file_atomic( ctx.out / "qor_loss.svg", svg_line_plot( { loss }, { "QoR head training", "epoch", "MSE" } ) );
  std::cout << "train: MSE " << fit.final_mse << ", NDCG@3 " << train_rep.mean.ndcg3 << '\n';
  return 0;
}

int eval_equiv( run_context& ctx, std::string const& model, std::string const& data_dir, std::vector<std::string> const& inputs,
                std::size_t n_pairs )
{
  auto tm = load_trained_model( model );
  const auto pooling = graph_pooling_from_string( ctx.cfg.get_string( "eval.pooling", "mean" ) );
  std::vector<aig_graph> designs;
  if ( !data_dir.empty() )
  {
    const auto mp = manifest_path( data_dir );
    for ( auto const& d : load_manifest( mp ).designs )
    {
      if ( d.ok )
      {
        auto g = read_aiger_file( mp.parent_path() / d.path );
        g.name = d.id;
        designs.push_back( std::move( g ) );
      }
    }
  }
  for ( auto const& f : expand_inputs( inputs, { ".aag", ".aig" } ) )
  {
    designs.push_back( read_graph( f ) );
  }
  if ( designs.empty() )
  {
    throw usage_error( "no designs given: pass --data or design files" );
  }
  const auto tools = tool_config::from( ctx.cfg );
  equiv_pair_options po;
  po.min_cone_gates = static_cast<std::size_t>( ctx.cfg.get_int( "equiv.min_cone_gates", static_cast<std::int64_t>( po.min_cone_gates ) ) );
  po.buffer_p = ctx.cfg.get_double( "equiv.buffer_p", po.buffer_p );
  po.sequence_length = static_cast<std::size_t>( ctx.cfg.get_int( "equiv.sequence_length", static_cast<std::int64_t>( po.sequence_length ) ) );
  const auto optimizer = tools.abc.empty() ? toy_optimizer() : abc_optimizer( tools, ctx.out / "runs" );
  const auto seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "eval.seed", static_cast<std::int64_t>( ctx.seed ) ) );
  const auto pairs = build_equiv_pairs( designs, n_pairs, seed, optimizer, po );
  const auto rep = evaluate_equivalence( pairs.pairs, tm.params, tm.config, pooling );
  write_file_atomic( ctx.out / "equiv_pairs.csv", rep.to_csv() );
  auto summary = rep.to_json();
  summary["skipped_capacity"] = pairs.skipped_capacity;
  write_json( ctx.out / "equiv_summary.json", summary );
  plot_series roc{ "ROC", {}, {} };
  for ( auto const& p : rep.roc.points )
  {
    roc.x.push_back( p.fpr );
    roc.y.push_back( p.tpr );
  }
  plot_options po2{ "ROC (AUC " + std::to_string( rep.roc.auc ) + ")", "false positive rate", "true positive rate" };
  po2.diagonal = true;
  write_file_atomic( ctx.out / "roc.svg", svg_line_plot( { roc }, po2 ) );
  auto const& c = rep.roc.at_threshold;
  std::cout << pairs.pairs.size() << " pairs: AUC " << rep.roc.auc << ", threshold " << rep.roc.threshold << ", precision " << c.precision()
            << ", recall " << c.recall() << ", F1 " << c.f1() << '\n';
  return 0;
}

/* ---- exact ---- */

int exact_synth( run_context& ctx, std::string const& hex, std::uint32_t inputs, std::string const& fence_spec, std::uint32_t max_nodes )
{
  const auto tt = tt_from_hex( hex, inputs );
  std::optional<fence> constraint;
  if ( !fence_spec.empty() )
  {
    fence f;
    std::stringstream ss( fence_spec );
    std::string part;
    while ( std::getline( ss, part, ',' ) )
    {
      try
      {
        f.parts.push_back( static_cast<std::uint32_t>( std::stoul( part ) ) );
      }
      catch ( std::exception const& )
      {
        throw usage_error( "malformed fence '" + fence_spec + "' (expected e.g. 2,1)" );
      }
    }
    constraint = f;
  }
  const auto r = exact_synthesize( tt, inputs, max_nodes, constraint );
  if ( !r.feasible )
  {
    std::cout << "infeasible" << ( constraint ? " under fence " + constraint->to_string() : "" ) << '\n';
    return 0;
  }
  std::cout << "0x" << tt_to_hex( tt, inputs ) << ": " << r.size() << " AND nodes, " << r.levels() << " levels"
            << ( r.used_fence ? ", fence " + r.used_fence->to_string() : std::string() ) << '\n';
  for ( std::size_t k = 0; k < r.circuit.steps.size(); ++k )
  {
    auto const& s = r.circuit.steps[k];
    auto sig = [&]( std::uint32_t i, bool c ) {
      return std::string( c ? "~" : "" ) + ( i < inputs ? "x" + std::to_string( i ) : "n" + std::to_string( i - inputs ) );
    };
    std::cout << "  n" << k << " = " << sig( s.a, s.ca ) << " & " << sig( s.b, s.cb ) << '\n';
  }
  const auto o = r.circuit.output;
  std::cout << "  f = " << ( r.circuit.output_complement ? "~" : "" ) << ( o < inputs ? "x" + std::to_string( o ) : "n" + std::to_string( o - inputs ) )
            << '\n';
  write_graph( r.circuit.to_graph( "exact_" + tt_to_hex( tt, inputs ) ), ctx.out / "circuit.aag" );
  write_file_atomic( ctx.out / "stats.csv", "target,fences_explored,candidates,micros,size,levels\n0x" + tt_to_hex( tt, inputs ) + "," +
                                                std::to_string( r.stats.fences_explored ) + "," + std::to_string( r.stats.candidates ) +
                                                "," + std::to_string( r.stats.micros ) + "," + std::to_string( r.size() ) + "," +
                                                std::to_string( r.levels() ) + "\n" );
  return 0;
}

int exact_bench( run_context& ctx, std::uint32_t inputs, std::string const& mode, std::string const& model, std::uint32_t slack_nodes,
                 std::uint32_t slack_levels, std::uint32_t max_nodes )
{
  const auto targets = nondegenerate_functions( inputs );
  std::function<search_bounds( std::uint32_t, exact_result const& )> bounds_for = exact_bounds;
  std::optional<trained_model> tm;
  std::optional<bound_head> head;
  if ( mode == "predicted" )
  {
    if ( model.empty() )
    {
      throw usage_error( "--bounds predicted needs --model" );
    }
    tm = load_trained_model( model );
    std::vector<bound_sample> samples;
    for ( auto t : targets )
    {
      const auto r = exact_synthesize( t, inputs, max_nodes );
      samples.push_back( { function_graph( t, inputs ), r.size(), r.levels() } );
    }
    auto mc = default_bound_mlp();
    mc.seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "eval.seed", static_cast<std::int64_t>( ctx.seed ) ) );
    head = train_bound_head( samples, tm->params, tm->config, mc );
    bounds_for = [&]( std::uint32_t t, exact_result const& ) {
      return predict_bounds( function_graph( t, inputs ), tm->params, tm->config, *head, slack_nodes, slack_levels ).bounds();
    };
  }
  else if ( mode != "exact" )
  {
    throw usage_error( "--bounds must be exact or predicted" );
  }
  const auto rep = run_exact_bench( targets, inputs, bounds_for, max_nodes );
  write_file_atomic( ctx.out / "bench.csv", rep.to_csv() );
  auto summary = rep.summary();
  summary["bounds"] = mode;
  write_json( ctx.out / "bench_summary.json", summary );
  std::cout << rep.rows.size() << " targets: size mismatches " << rep.size_mismatches() << ", guided explored fewer fences on "
            << rep.guided_strictly_fewer() << ", never more on " << rep.guided_not_worse() << ", fallbacks " << rep.fallbacks() << '\n';
  return 0;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "mgvga: masked graph modeling and Verilog-AIG alignment toolkit" };
  app.require_subcommand( 1 );
  app.fallthrough();
  global_flags g;
  std::uint64_t seed_value = 0;
  std::size_t jobs_value = 1;
  app.add_option( "--config", g.config, "key = value configuration file" );
  auto* seed_opt = app.add_option( "--seed", seed_value, "seed for all randomness" );
  app.add_option( "--out", g.out, "output directory" )->capture_default_str();
  auto* jobs_opt = app.add_option( "--jobs", jobs_value, "parallel workers" )->check( CLI::PositiveNumber );
  app.add_option( "--tool-abc", g.tool_abc, "ABC executable (default: built-in toy transforms)" );
  app.add_option( "--tool-yosys", g.tool_yosys, "yosys executable (default: built-in Verilog front-end)" );
  app.add_option( "--embed-endpoint", g.embed_endpoint, "embedding service URL (overrides MGVGA_EMBED_ENDPOINT)" );
  app.add_flag( "-v,--verbose", g.verbose, "progress on stderr" );

  std::function<int( run_context& )> action;
  std::string command;
  auto group = [&]( char const* name, char const* help ) {
    auto* s = app.add_subcommand( name, help );
    s->require_subcommand( 1 );
    return s;
  };
  auto leaf = [&]( CLI::App* parent, char const* name, char const* help ) {
    return parent->add_subcommand( name, help );
  };

  // aig
  auto* aig = group( "aig", "AIG utilities" );
  std::string in_a, in_b, out_file;
  bool by_name = false;
  std::uint64_t samples = 0;
  std::uint32_t node = 0, pis = 8, gates = 64;
  double and_p = 0.7;
  auto* conv = leaf( aig, "convert", "convert between .aag, .aig and .json" );
  conv->add_option( "input", in_a )->required();
  conv->add_option( "output", in_b )->required();
  conv->final_callback( [&] { action = [&]( run_context& c ) { return aig_convert( c, in_a, in_b ); }; } );
  auto* val = leaf( aig, "validate", "check structural invariants" );
  val->add_option( "input", in_a )->required();
  val->final_callback( [&] { action = [&]( run_context& c ) { return aig_validate( c, in_a ); }; } );
  auto* eq = leaf( aig, "equiv", "functional equivalence of two AIGs" );
  eq->add_option( "first", in_a )->required();
  eq->add_option( "second", in_b )->required();
  eq->add_flag( "--by-name", by_name, "match PIs and POs by name" );
  eq->add_option( "--samples", samples, "random simulation with this many patterns" );
  eq->final_callback( [&] { action = [&]( run_context& c ) { return aig_equiv( c, in_a, in_b, by_name, samples ); }; } );
  auto* cone_cmd = leaf( aig, "cone", "extract the transitive fan-in cone of a node" );
  cone_cmd->add_option( "input", in_a )->required();
  cone_cmd->add_option( "--node", node, "root node id" )->required();
  cone_cmd->add_option( "--output", out_file, "output file (default <out>/cone_<node>.aag)" );
  cone_cmd->final_callback( [&] { action = [&]( run_context& c ) { return aig_cone( c, in_a, node, out_file ); }; } );
  auto* rnd = leaf( aig, "random", "random AIG from the seed" );
  rnd->add_option( "--pis", pis )->capture_default_str();
  rnd->add_option( "--gates", gates )->capture_default_str();
  rnd->add_option( "--and-probability", and_p )->capture_default_str();
  rnd->add_option( "--output", out_file, "output file (default <out>/random.aag)" );
  rnd->final_callback( [&] { action = [&]( run_context& c ) { return aig_random( c, pis, gates, and_p, out_file ); }; } );

  // data
  auto* data = group( "data", "dataset construction" );
  std::size_t count = 1500, length = 20;
  std::vector<std::string> inputs;
  std::string seq_file;
  bool store = false, no_verify = false;
  double eval_fraction = 0.2;
  auto* seqs = leaf( data, "sequences", "sample optimization sequences" );
  seqs->add_option( "--count", count )->capture_default_str();
  seqs->add_option( "--length", length )->capture_default_str();
  seqs->final_callback( [&] { action = [&]( run_context& c ) { return data_sequences( c, count, length ); }; } );
  auto* build = leaf( data, "build", "label designs with post-synthesis gate counts" );
  build->add_option( "designs", inputs, "AIGER files or directories" )->required();
  build->add_option( "--sequences-file", seq_file, "sequences.jsonl or a dataset manifest" );
  build->add_option( "--count", count, "sequences to sample when no file is given" )->capture_default_str();
  build->add_option( "--length", length )->capture_default_str();
  build->add_flag( "--store-intermediate", store, "keep the AIG after every step" );
  build->add_option( "--eval-fraction", eval_fraction )->capture_default_str();
  build->add_flag( "--no-verify", no_verify, "skip the equivalence check of produced AIGs" );
  build->final_callback( [&] {
    action = [&]( run_context& c ) { return data_build( c, inputs, seq_file, count, length, store, eval_fraction, !no_verify ); };
  } );
  auto* pair = leaf( data, "pair", "synthesize Verilog files into paired AIGs" );
  pair->add_option( "corpus", in_a, "directory of .v files" )->required()->check( CLI::ExistingDirectory );
  pair->final_callback( [&] { action = [&]( run_context& c ) { return data_pair( c, in_a ); }; } );

  // embed
  auto* embed = group( "embed", "Verilog token embeddings" );
  auto* fetch = leaf( embed, "fetch", "embed through the remote service (cached)" );
  fetch->add_option( "sources", inputs, "Verilog files or directories" )->required();
  fetch->final_callback( [&] { action = [&]( run_context& c ) { return embed_files( c, inputs, true ); }; } );
  auto* local = leaf( embed, "local", "deterministic offline embedding" );
  local->add_option( "sources", inputs, "Verilog files or directories" )->required();
  local->final_callback( [&] { action = [&]( run_context& c ) { return embed_files( c, inputs, false ); }; } );

  // train
  auto* tr = group( "train", "model training" );
  auto* mg = leaf( tr, "mgvga", "train the graph autoencoder with MGM and VGA" );
  mg->add_option( "inputs", inputs, "dataset directories, manifests, AIGER files or directories" )->required();
  mg->final_callback( [&] { action = [&]( run_context& c ) { return train_mgvga( c, inputs ); }; } );

  // eval
  auto* ev = group( "eval", "downstream evaluation" );
  std::string model, data_dir;
  std::size_t n_pairs = 200;
  auto* qor = leaf( ev, "qor", "QoR ranking with a head on frozen embeddings" );
  qor->add_option( "--model", model, "training checkpoint" )->required()->check( CLI::ExistingFile );
  qor->add_option( "--data", data_dir, "labelled dataset directory" )->required();
  qor->final_callback( [&] { action = [&]( run_context& c ) { return eval_qor( c, model, data_dir ); }; } );
  auto* eqv = leaf( ev, "equiv", "equivalent-gate identification by embedding similarity" );
  eqv->add_option( "--model", model, "training checkpoint" )->required()->check( CLI::ExistingFile );
  eqv->add_option( "--data", data_dir, "dataset directory supplying designs" );
  eqv->add_option( "designs", inputs, "AIGER files or directories" );
  eqv->add_option( "--pairs", n_pairs )->capture_default_str();
  eqv->final_callback( [&] { action = [&]( run_context& c ) { return eval_equiv( c, model, data_dir, inputs, n_pairs ); }; } );

  // exact
  auto* ex = group( "exact", "exact synthesis of small functions" );
  std::string hex, fence_spec, bounds_mode = "exact";
  std::uint32_t num_inputs = 3, max_nodes = default_max_exact_nodes, slack_nodes = 1, slack_levels = 1;
  auto* syn = leaf( ex, "synth", "minimum AIG for a hex truth table" );
  syn->add_option( "truth_table", hex, "hex, bit a is the output under assignment a" )->required();
  syn->add_option( "--inputs", num_inputs )->capture_default_str()->check( CLI::Range( 1, 3 ) );
  syn->add_option( "--fence", fence_spec, "restrict to one fence, e.g. 2,1" );
  syn->add_option( "--max-nodes", max_nodes )->capture_default_str();
  syn->final_callback( [&] { action = [&]( run_context& c ) { return exact_synth( c, hex, num_inputs, fence_spec, max_nodes ); }; } );
  auto* bench = leaf( ex, "bench", "unconstrained vs fence-guided search over all non-degenerate functions" );
  bench->add_option( "--inputs", num_inputs )->capture_default_str()->check( CLI::Range( 1, 3 ) );
  bench->add_option( "--bounds", bounds_mode, "exact | predicted" )->capture_default_str();
  bench->add_option( "--model", model, "checkpoint for predicted bounds" );
  bench->add_option( "--slack-nodes", slack_nodes )->capture_default_str();
  bench->add_option( "--slack-levels", slack_levels )->capture_default_str();
  bench->add_option( "--max-nodes", max_nodes )->capture_default_str();
  bench->final_callback( [&] {
    action = [&]( run_context& c ) { return exact_bench( c, num_inputs, bounds_mode, model, slack_nodes, slack_levels, max_nodes ); };
  } );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::CallForHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::CallForAllHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::CallForVersion const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::ParseError const& e )
  {
    app.exit( e );
    std::cerr << '\n' << app.help();
    return 2;
  }
  if ( !action )
  {
    std::cerr << app.help();
    return 2;
  }
  for ( auto* s : app.get_subcommands() )
  {
    for ( auto* t : s->get_subcommands() )
    {
      command = s->get_name() + " " + t->get_name();
    }
  }
  if ( *seed_opt )
  {
    g.seed = seed_value;
  }
  if ( *jobs_opt )
  {
    g.jobs = jobs_value;
  }

  run_context ctx;
  ctx.verbose = g.verbose;
  ctx.final_out = g.out;
  fs::path staging;
  std::set<std::string> from_flags;
  int code = 0;
  try
  {
    ctx.cfg = load_config( g, from_flags );
    ctx.seed = static_cast<std::uint64_t>( ctx.cfg.get_int( "run.seed", 0 ) );
    ctx.jobs = static_cast<std::size_t>( std::max<std::int64_t>( 1, ctx.cfg.get_int( "run.jobs", 1 ) ) );
    const auto abs_out = fs::absolute( ctx.final_out ).lexically_normal();
    staging = abs_out.parent_path() / ( "." + abs_out.filename().string() + ".partial-" + std::to_string( ::getpid() ) );
    fs::remove_all( staging );
    fs::create_directories( staging );
    ctx.out = staging;
    code = action( ctx );
    write_file_atomic( staging / "resolved_config.toml", "# mgvga " + command + "\n" + ctx.cfg.resolved_text() );
    for ( auto const& k : ctx.cfg.unused_keys() )
    {
      if ( from_flags.count( k ) )
      {
        continue;
      }
      std::cerr << "warning: config key '" << k << "' was not used\n";
    }
    commit_output( staging, abs_out );
    return code;
  }
  catch ( usage_error const& e )
  {
    std::cerr << "usage error: " << e.what() << '\n';
    code = 2;
  }
  catch ( config_error const& e )
  {
    std::cerr << "configuration error: " << e.what() << '\n';
    code = 2;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << '\n';
    code = 1;
  }
  if ( !staging.empty() )
  {
    std::error_code ec;
    fs::remove_all( staging, ec );
  }
  return code;
}
