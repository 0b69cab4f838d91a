#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <mgvga/util/hash.hpp>
#include <mgvga/util/subprocess.hpp>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mgvga;

namespace
{

struct scratch
{
  fs::path dir;
  explicit scratch( std::string const& tag )
  {
    dir = fs::temp_directory_path() / ( "mgvga_cli_" + tag + "_" + std::to_string( ::getpid() ) );
    fs::remove_all( dir );
    fs::create_directories( dir );
  }
  ~scratch() { fs::remove_all( dir ); }
};

process_result cli( std::vector<std::string> args, fs::path const& cwd )
{
  args.insert( args.begin(), MGVGA_CLI_PATH );
  return run_process( args, std::chrono::minutes( 10 ), cwd );
}

std::size_t partial_dirs( fs::path const& dir )
{
  std::size_t n = 0;
  for ( auto const& e : fs::directory_iterator( dir ) )
  {
    n += e.path().filename().string().find( ".partial-" ) != std::string::npos;
  }
  return n;
}

} // namespace

TEST_CASE( "exit codes", "[cli]" )
{
  scratch s( "codes" );
  CHECK( cli( { "--help" }, s.dir ).exit_code == 0 );
  CHECK( cli( { "aig", "--help" }, s.dir ).exit_code == 0 );
  CHECK( cli( {}, s.dir ).exit_code == 2 );
  CHECK( cli( { "--no-such-flag", "aig", "random" }, s.dir ).exit_code == 2 );
  CHECK( cli( { "aig", "frobnicate" }, s.dir ).exit_code == 2 );
  CHECK( cli( { "exact", "synth", "96", "--inputs", "7" }, s.dir ).exit_code == 2 );

  const auto missing = cli( { "--out", "o", "aig", "validate", "missing.aag" }, s.dir );
  CHECK( missing.exit_code == 1 );
  CHECK( missing.output.find( "error:" ) != std::string::npos );
  CHECK( !fs::exists( s.dir / "o" ) );
  CHECK( partial_dirs( s.dir ) == 0 );

  write_file_atomic( s.dir / "bad.toml", "[train]\nepochs = many\n" );
  write_file_atomic( s.dir / "g.aag", "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n" );
  CHECK( cli( { "--config", "bad.toml", "--out", "t", "train", "mgvga", "g.aag" }, s.dir ).exit_code == 2 );
  CHECK( cli( { "--config", "absent.toml", "aig", "validate", "g.aag" }, s.dir ).exit_code == 2 );
  CHECK( partial_dirs( s.dir ) == 0 );

  // malformed AIGER is a domain error, not a usage error
  write_file_atomic( s.dir / "broken.aag", "aag 3 2 0 1 1\n2\n" );
  CHECK( cli( { "--out", "b", "aig", "validate", "broken.aag" }, s.dir ).exit_code == 1 );
}

TEST_CASE( "aig subcommands", "[cli]" )
{
  scratch s( "aig" );
  REQUIRE( cli( { "--seed", "5", "--out", "a", "aig", "random", "--pis", "6", "--gates", "40" }, s.dir ).exit_code == 0 );
  REQUIRE( cli( { "--seed", "5", "--out", "b", "aig", "random", "--pis", "6", "--gates", "40" }, s.dir ).exit_code == 0 );
  REQUIRE( cli( { "--seed", "6", "--out", "c", "aig", "random", "--pis", "6", "--gates", "40" }, s.dir ).exit_code == 0 );
  CHECK( sha256_file( s.dir / "a/random.aag" ) == sha256_file( s.dir / "b/random.aag" ) );
  CHECK( sha256_file( s.dir / "a/random.aag" ) != sha256_file( s.dir / "c/random.aag" ) );

  const auto cfg = read_file( s.dir / "a/resolved_config.toml" );
  CHECK( cfg.find( "run.seed = 5" ) != std::string::npos );
  CHECK( cfg.find( "aig random" ) != std::string::npos );

  CHECK( cli( { "aig", "validate", "a/random.aag" }, s.dir ).exit_code == 0 );
  REQUIRE( cli( { "aig", "convert", "a/random.aag", "r.json" }, s.dir ).exit_code == 0 );
  REQUIRE( cli( { "aig", "convert", "r.json", "r.aig" }, s.dir ).exit_code == 0 );
  CHECK( cli( { "aig", "convert", "r.json", "r.json" }, s.dir ).exit_code == 2 );
  CHECK( cli( { "aig", "convert", "r.json", "r.txt" }, s.dir ).exit_code == 2 );

  const auto eq = cli( { "--out", "e", "aig", "equiv", "a/random.aag", "r.aig" }, s.dir );
  CHECK( eq.exit_code == 0 );
  CHECK( nlohmann::json::parse( read_file( s.dir / "e/verdict.json" ) )["verdict"] == "equivalent" );

  write_file_atomic( s.dir / "and.aag", "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n" );
  write_file_atomic( s.dir / "or.aag", "aag 3 2 0 1 1\n2\n4\n7\n6 3 5\n" );
  const auto neq = cli( { "--out", "n", "aig", "equiv", "and.aag", "or.aag" }, s.dir );
  CHECK( neq.exit_code == 0 );
  const auto v = nlohmann::json::parse( read_file( s.dir / "n/verdict.json" ) );
  CHECK( v["verdict"] == "inequivalent" );
  CHECK( v.contains( "witness" ) );
  // differing PO counts cannot be compared at all
  CHECK( cli( { "aig", "equiv", "a/random.aag", "and.aag" }, s.dir ).exit_code == 1 );

  CHECK( cli( { "--out", "k", "aig", "cone", "a/random.aag", "--node", "20" }, s.dir ).exit_code == 0 );
  CHECK( fs::exists( s.dir / "k/cone_20.aag" ) );

  // a second run into an existing directory replaces entries of the same name
  REQUIRE( cli( { "--seed", "6", "--out", "a", "aig", "random", "--pis", "6", "--gates", "40" }, s.dir ).exit_code == 0 );
  CHECK( sha256_file( s.dir / "a/random.aag" ) == sha256_file( s.dir / "c/random.aag" ) );
  CHECK( partial_dirs( s.dir ) == 0 );
}

TEST_CASE( "exact subcommands", "[cli]" )
{
  scratch s( "exact" );
  const auto r = cli( { "--out", "x", "exact", "synth", "0x96", "--inputs", "3" }, s.dir );
  REQUIRE( r.exit_code == 0 );
  CHECK( r.output.find( "6 AND nodes" ) != std::string::npos );
  CHECK( fs::exists( s.dir / "x/circuit.aag" ) );

  const auto inf = cli( { "--out", "y", "exact", "synth", "e8", "--inputs", "3", "--fence", "1,1" }, s.dir );
  CHECK( inf.exit_code == 0 );
  CHECK( inf.output.find( "infeasible" ) != std::string::npos );
  CHECK( cli( { "exact", "synth", "e8", "--inputs", "3", "--fence", "1,x" }, s.dir ).exit_code == 2 );
  CHECK( cli( { "exact", "synth", "zz", "--inputs", "3" }, s.dir ).exit_code == 1 );

  REQUIRE( cli( { "--out", "b", "exact", "bench", "--inputs", "3" }, s.dir ).exit_code == 0 );
  const auto j = nlohmann::json::parse( read_file( s.dir / "b/bench_summary.json" ) );
  CHECK( j["targets"] == 218 );
  CHECK( j["size_mismatches"] == 0 );
  CHECK( j["guided_not_worse"] == 218 );
  CHECK( cli( { "exact", "bench", "--bounds", "predicted" }, s.dir ).exit_code == 2 );
}

TEST_CASE( "pipeline is deterministic under a fixed seed", "[cli]" )
{
  scratch s( "pipe" );
  for ( int i = 1; i <= 6; ++i )
  {
    REQUIRE( cli( { "--seed", std::to_string( i ), "--out", "tmp", "aig", "random", "--pis", "8", "--gates", "60", "--output",
                    "designs/r" + std::to_string( i ) + ".aag" },
                  s.dir )
                 .exit_code == 0 );
  }
  fs::create_directories( s.dir / "corpus" );
  write_file_atomic( s.dir / "corpus/a.v", "module a(input x, input y, output z); assign z = x & ~y; endmodule\n" );
  write_file_atomic( s.dir / "corpus/b.v", "module b(input x, input y, input w, output z); assign z = (x ^ y) | w; endmodule\n" );
  write_file_atomic( s.dir / "cfg.toml", "[train]\nepochs = 3\nbatch_size = 4\n" );

  auto run_all = [&]( std::string const& tag ) {
    const auto ds = "ds_" + tag, pr = "pr_" + tag, tr = "tr_" + tag;
    REQUIRE( cli( { "--seed", "1", "--out", ds, "data", "build", "designs", "--count", "4", "--length", "5", "--eval-fraction", "0.34" }, s.dir )
                 .exit_code == 0 );
    REQUIRE( cli( { "--out", pr, "data", "pair", "corpus" }, s.dir ).exit_code == 0 );
    REQUIRE( cli( { "--seed", "1", "--config", "cfg.toml", "--out", tr, "train", "mgvga", ds, pr }, s.dir ).exit_code == 0 );
    REQUIRE( cli( { "--seed", "1", "--out", "q_" + tag, "eval", "qor", "--model", tr + "/model.ckpt", "--data", ds }, s.dir ).exit_code == 0 );
    REQUIRE( cli( { "--seed", "1", "--out", "e_" + tag, "eval", "equiv", "--model", tr + "/model.ckpt", "--data", ds, "--pairs", "20" }, s.dir )
                 .exit_code == 0 );
  };
  run_all( "a" );
  run_all( "b" );

  for ( auto const* f : { "ds_%/manifest.jsonl", "ds_%/labels.csv", "pr_%/manifest.jsonl", "tr_%/model.ckpt", "tr_%/metrics.csv",
                          "q_%/qor_summary.json", "q_%/qor_eval.csv", "e_%/equiv_pairs.csv", "e_%/equiv_summary.json" } )
  {
    std::string a( f ), b( f );
    a.replace( a.find( '%' ), 1, "a" );
    b.replace( b.find( '%' ), 1, "b" );
    INFO( f );
    REQUIRE( fs::exists( s.dir / a ) );
    CHECK( sha256_file( s.dir / a ) == sha256_file( s.dir / b ) );
  }
  for ( auto const* d : { "ds_a", "pr_a", "tr_a", "q_a", "e_a" } )
  {
    CHECK( fs::exists( s.dir / d / "resolved_config.toml" ) );
  }
  CHECK( fs::exists( s.dir / "tr_a/loss.svg" ) );
  CHECK( fs::exists( s.dir / "e_a/roc.svg" ) );

  const auto q = nlohmann::json::parse( read_file( s.dir / "q_a/qor_summary.json" ) );
  CHECK( q.contains( "eval" ) );
  CHECK( q["eval"].contains( "NDCG@3" ) );
  const auto e = nlohmann::json::parse( read_file( s.dir / "e_a/equiv_summary.json" ) );
  CHECK( e["pairs"] == 20 );

  REQUIRE( cli( { "--out", "em", "embed", "local", "corpus" }, s.dir ).exit_code == 0 );
  const auto emb = nlohmann::json::parse( read_file( s.dir / "em/embeddings/a.json" ) );
  CHECK( emb["pooled"].size() == 16 );
  CHECK( cli( { "--out", "ef", "embed", "fetch", "corpus" }, s.dir ).exit_code == 2 );
}
