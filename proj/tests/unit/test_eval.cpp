#include <catch2/catch_amalgamated.hpp>

#include <mgvga/eval/equivalence.hpp>
#include <mgvga/eval/metrics.hpp>
#include <mgvga/eval/qor.hpp>
#include <mgvga/aig/random_aig.hpp>
#include <mgvga/util/svg_plot.hpp>

#include "../support/metric_oracle.hpp"

#include <cmath>
#include <set>

using namespace mgvga;
using Catch::Approx;
using oracle::brute_auc;
using oracle::brute_ndcg;
using oracle::brute_topk;
using oracle::rank_of;

namespace
{

std::vector<double> random_vector( rng& r, std::size_t n, bool ties )
{
  std::vector<double> v( n );
  for ( auto& x : v )
  {
    x = ties ? static_cast<double>( r.below( 5 ) ) : r.uniform( -3.0, 3.0 );
  }
  return v;
}

model_config tiny_model()
{
  model_config m;
  m.d = 12;
  m.d_v = 8;
  m.encoder_layers = 3;
  m.decoder_layers = 1;
  return m;
}

} // namespace

TEST_CASE( "label normalization", "[eval]" )
{
  const auto n = normalize_labels( { 10, 20, 30 } );
  CHECK( n.values[0] == Approx( std::sqrt( 1.5 ) ).margin( 1e-12 ) );
  CHECK( n.values[1] == Approx( 0.0 ).margin( 1e-12 ) );
  CHECK( n.values[2] == Approx( -std::sqrt( 1.5 ) ).margin( 1e-12 ) );
  CHECK( n.values[0] == Approx( 1.2247 ).margin( 1e-4 ) );
  CHECK_FALSE( n.degenerate );

  const auto c = normalize_labels( { 7, 7, 7, 7 } );
  CHECK( c.degenerate );
  CHECK( c.values == std::vector<double>( 4, 0.0 ) );
  CHECK_THROWS_AS( normalize_labels( { 1 } ), metric_error );

  rng r( 11 );
  for ( int trial = 0; trial < 200; ++trial )
  {
    const auto a = random_vector( r, 2 + r.below( 40 ), false );
    const auto v = normalize_labels( a ).values;
    double mean = 0.0, sq = 0.0;
    for ( auto x : v )
    {
      mean += x;
    }
    mean /= static_cast<double>( v.size() );
    for ( auto x : v )
    {
      sq += ( x - mean ) * ( x - mean );
    }
    CHECK( std::abs( mean ) < 1e-9 );
    CHECK( std::sqrt( sq / static_cast<double>( v.size() ) ) == Approx( 1.0 ).margin( 1e-9 ) );
    // fewer gates rank higher
    const auto lo = std::min_element( a.begin(), a.end() ) - a.begin();
    CHECK( v[static_cast<std::size_t>( lo )] == *std::max_element( v.begin(), v.end() ) );
  }
}

TEST_CASE( "ndcg at k", "[eval]" )
{
  const std::vector<double> a{ 1.0, 0.5, 0.0 };
  const std::vector<double> rev{ 0.0, 0.5, 1.0 };
  CHECK( ndcg_at_k( a, rev, 2 ).value == Approx( ( 0.5 / std::log2( 3.0 ) ) / ( 1.0 + 0.5 / std::log2( 3.0 ) ) ).margin( 1e-12 ) );
  CHECK( ndcg_at_k( a, rev, 2 ).value == Approx( 0.2398 ).margin( 1e-4 ) );
  CHECK( ndcg_at_k( a, a, 3 ).value == Approx( 1.0 ) );

  // the worst gate count ranked first gives a negative score
  const auto n = normalize_labels( { 10, 20, 30 } ).values;
  const auto bad = ndcg_at_k( n, { 0.0, 0.1, 0.9 }, 1 );
  CHECK( bad.value < 0.0 );
  CHECK( bad.value == Approx( -1.0 ) );

  CHECK( ndcg_at_k( { 0, 0, 0 }, { 1, 2, 3 }, 2 ).undefined );
  CHECK_THROWS_AS( ndcg_at_k( a, rev, 0 ), metric_error );
  CHECK_THROWS_AS( ndcg_at_k( a, rev, 4 ), metric_error );
  CHECK_THROWS_AS( ndcg_at_k( a, { 1.0 }, 1 ), metric_error );

  // ties in B resolve to the lower index
  CHECK( ndcg_at_k( a, { 5, 5, 5 }, 1 ).value == Approx( 1.0 ) );
  CHECK( ndcg_at_k( rev, { 5, 5, 5 }, 1 ).value == Approx( 0.0 ) );

  rng r( 3 );
  for ( int trial = 0; trial < 1000; ++trial )
  {
    const auto s = 2 + r.below( 30 );
    const auto an = normalize_labels( random_vector( r, s, trial % 2 == 0 ) );
    if ( an.degenerate )
    {
      continue;
    }
    const auto b = random_vector( r, s, trial % 3 == 0 );
    const auto k = 1 + r.below( s );
    const auto got = ndcg_at_k( an.values, b, k );
    if ( got.undefined )
    {
      continue;
    }
    REQUIRE( got.value == Approx( brute_ndcg( an.values, b, k ) ).margin( 1e-9 ) );
    REQUIRE( ndcg_at_k( an.values, an.values, k ).value == Approx( 1.0 ).margin( 1e-9 ) );
    // only the order of B matters
    std::vector<double> mono( b.size() );
    std::transform( b.begin(), b.end(), mono.begin(), []( double x ) { return 3.0 * std::exp( x ) + 1.0; } );
    REQUIRE( ndcg_at_k( an.values, mono, k ).value == got.value );
  }
}

TEST_CASE( "top-k commonality", "[eval]" )
{
  // 20 sequences, top 10% holds two: {s1, s2} vs {s2, s3}
  std::vector<double> a( 20, 0.0 ), b( 20, 0.0 );
  a[1] = 2.0;
  a[2] = 1.0;
  b[2] = 2.0;
  b[3] = 1.0;
  CHECK( topk_size( 20, 10.0 ) == 2 );
  CHECK( topk_commonality( a, b, 10.0 ) == Approx( 0.5 ) );
  CHECK( topk_commonality( a, a, 10.0 ) == 1.0 );
  CHECK( topk_size( 7, 10.0 ) == 1 );
  CHECK( topk_size( 1500, 3.0 ) == 45 );
  CHECK_THROWS_AS( topk_commonality( a, b, 0.0 ), metric_error );
  CHECK_THROWS_AS( topk_commonality( a, { 1.0 }, 10.0 ), metric_error );

  rng r( 5 );
  for ( int trial = 0; trial < 1000; ++trial )
  {
    const auto s = 1 + r.below( 60 );
    const auto x = random_vector( r, s, trial % 2 == 0 );
    const auto y = random_vector( r, s, trial % 4 == 0 );
    const double k = 1.0 + static_cast<double>( r.below( 100 ) );
    const auto got = topk_commonality( x, y, k );
    REQUIRE( got == brute_topk( x, y, topk_size( s, k ) ) );
    REQUIRE( got >= 0.0 );
    REQUIRE( got <= 1.0 );
    if ( trial % 2 == 1 )
    {
      // without ties, relabelling the sequences consistently changes nothing
      std::vector<std::size_t> perm( s );
      std::iota( perm.begin(), perm.end(), std::size_t{ 0 } );
      r.shuffle( perm.begin(), perm.end() );
      std::vector<double> px( s ), py( s );
      for ( std::size_t i = 0; i < s; ++i )
      {
        px[i] = x[perm[i]];
        py[i] = y[perm[i]];
      }
      REQUIRE( topk_commonality( px, py, k ) == got );
    }
  }
}

TEST_CASE( "roc sweep and threshold", "[eval]" )
{
  CHECK( roc_and_threshold( { 0.9, 0.8, 0.2, 0.1 }, { true, true, false, false } ).auc == 1.0 );
  CHECK( roc_and_threshold( { 0.9, 0.8, 0.2, 0.1 }, { false, false, true, true } ).auc == 0.0 );
  CHECK_THROWS_AS( roc_and_threshold( { 0.1, 0.2 }, { true, true } ), metric_error );
  CHECK_THROWS_AS( roc_and_threshold( { 0.1 }, { true, false } ), metric_error );

  const auto perfect = roc_and_threshold( { 0.9, 0.8, 0.2, 0.1 }, { true, true, false, false } );
  CHECK( perfect.threshold == 0.8 );
  CHECK( perfect.youden_j == 1.0 );
  CHECK( perfect.at_threshold.f1() == 1.0 );
  CHECK( perfect.points.front().fpr == 0.0 );
  CHECK( perfect.points.back().tpr == 1.0 );
  CHECK( perfect.points.back().fpr == 1.0 );

  rng r( 7 );
  {
    std::vector<double> s( 20000 );
    std::vector<bool> l( 20000 );
    for ( std::size_t i = 0; i < s.size(); ++i )
    {
      s[i] = r.uniform();
      l[i] = r.bernoulli( 0.5 );
    }
    CHECK( std::abs( roc_and_threshold( s, l ).auc - 0.5 ) < 0.05 );
  }

  for ( int trial = 0; trial < 1000; ++trial )
  {
    const std::size_t n = trial == 0 ? 200 : 2 + r.below( 60 );
    std::vector<double> s( n );
    std::vector<bool> l( n );
    for ( std::size_t i = 0; i < n; ++i )
    {
      l[i] = i == 0 ? true : ( i == 1 ? false : r.bernoulli( 0.5 ) );
      s[i] = trial % 2 ? std::round( r.uniform( 0, 6 ) ) + ( l[i] ? 1 : 0 ) : r.uniform() + ( l[i] ? 0.3 : 0.0 );
    }
    const auto roc = roc_and_threshold( s, l );
    REQUIRE( std::abs( roc.auc - brute_auc( s, l ) ) < 1e-9 );

    // Youden optimum over every candidate threshold
    const auto pos = static_cast<double>( std::count( l.begin(), l.end(), true ) );
    const auto neg = static_cast<double>( n ) - pos;
    double best = -1.0;
    for ( auto t : s )
    {
      const auto c = confusion_at( s, l, t );
      best = std::max( best, static_cast<double>( c.tp ) / pos - static_cast<double>( c.fp ) / neg );
    }
    REQUIRE( roc.youden_j == Approx( best ).margin( 1e-12 ) );
    auto const& c = roc.at_threshold;
    REQUIRE( c.tp + c.fp + c.tn + c.fn == n );
    REQUIRE( static_cast<double>( c.tp ) / pos - static_cast<double>( c.fp ) / neg == Approx( best ).margin( 1e-12 ) );
    if ( c.tp + c.fp > 0 )
    {
      REQUIRE( c.precision() == Approx( static_cast<double>( c.tp ) / static_cast<double>( c.tp + c.fp ) ) );
    }
    REQUIRE( c.recall() == Approx( static_cast<double>( c.tp ) / pos ) );
  }
}

TEST_CASE( "cosine similarity", "[eval]" )
{
  Eigen::VectorXd a( 3 ), b( 3 ), z = Eigen::VectorXd::Zero( 3 );
  a << 1, 0, 0;
  b << 0, 2, 0;
  CHECK( cosine_similarity( a, a ).value == Approx( 1.0 ) );
  CHECK( cosine_similarity( a, b ).value == 0.0 );
  CHECK( cosine_similarity( a, Eigen::VectorXd( -a ) ).value == Approx( -1.0 ) );
  const auto zr = cosine_similarity( a, z );
  CHECK( zr.zero_vector );
  CHECK( zr.value == 0.0 );
}

TEST_CASE( "graph embeddings leave the encoder frozen", "[eval]" )
{
  auto cfg = tiny_model();
  auto ps = init_model<float>( cfg, 4 );
  const parameter_set<float> before = ps;
  const auto g = random_aig( 5, 30, 9 );
  const auto e = graph_embedding( ps, cfg, g );
  const auto m = graph_embedding( ps, cfg, g, graph_pooling::max );
  CHECK( e.size() == cfg.d );
  CHECK( ( m.array() >= e.array() - 1e-6 ).all() );
  for ( std::size_t i = 0; i < ps.size(); ++i )
  {
    REQUIRE( ps[i].value == before[i].value );
    REQUIRE( ps[i].grad.size() == before[i].grad.size() );
  }
  CHECK( equivalence_score( g, g, ps, cfg ).value == Approx( 1.0 ) );
  CHECK( graph_pooling_from_string( "max" ) == graph_pooling::max );
  CHECK_THROWS_AS( graph_pooling_from_string( "sum" ), config_error );
}

TEST_CASE( "sequence one-hot encoding", "[eval]" )
{
  const opt_sequence s{ 3, { "rewrite", "balance", "rewrite" } };
  const auto v = encode_sequence( s );
  CHECK( v.size() == 140 );
  CHECK( v.sum() == 3.0 );
  CHECK( v( 0 ) == 1.0 );
  const auto bal = std::find( transform_vocabulary.begin(), transform_vocabulary.end(), "balance" ) - transform_vocabulary.begin();
  CHECK( v( 7 + bal ) == 1.0 );
  CHECK( v( 14 ) == 1.0 );
  CHECK_THROWS_AS( encode_sequence( s, 2 ), eval_error );
  CHECK_THROWS_AS( encode_sequence( { 0, { "strash" } } ), eval_error );
}

TEST_CASE( "qor head", "[eval]" )
{
  auto cfg = tiny_model();
  auto ps = init_model<float>( cfg, 1 );
  const parameter_set<float> before = ps;
  const auto seqs = sample_sequences( 10, 20, 2 );

  qor_dataset data;
  for ( std::uint32_t d = 0; d < 5; ++d )
  {
    const auto g = random_aig( 6, 40, 100 + d );
    data.designs.push_back( { g.name, graph_embedding( ps, cfg, g ), false } );
    for ( auto const& s : seqs )
    {
      const auto out = toy_synthesize( g, s, d );
      data.samples.push_back( { d, s, static_cast<double>( out.count( node_type::and_gate ) ), 0.0 } );
    }
  }
  REQUIRE( data.samples.size() == 50 );
  data.normalize();

  qor_config qc;
  const auto fit = train_qor_head( data, qc );
  CHECK( fit.final_mse < 0.05 );
  CHECK( fit.loss.size() == qc.epochs );
  for ( std::size_t i = 0; i < ps.size(); ++i )
  {
    REQUIRE( ps[i].value == before[i].value );
  }
  const auto rep = evaluate_qor( fit.head, data );
  CHECK( rep.designs.size() == 5 );
  CHECK( rep.to_csv().find( "ndcg@3" ) != std::string::npos );
  CHECK( rep.to_json().contains( "NDCG@5" ) );

  // a constant-label set is fit by the constant
  qor_dataset flat = data;
  for ( auto& s : flat.samples )
  {
    s.label = 0.7;
  }
  const auto cf = train_qor_head( flat, qc );
  const auto p = cf.head.predict( flat );
  CHECK( ( p.array() - 0.7 ).abs().maxCoeff() < 1e-2 );

  CHECK_THROWS_AS( train_qor_head( qor_dataset{}, qc ), eval_error );
  qc.hidden = 0;
  CHECK_THROWS_AS( train_qor_head( data, qc ), config_error );
}

TEST_CASE( "equivalence pairs", "[eval]" )
{
  std::vector<aig_graph> designs;
  for ( std::uint32_t d = 0; d < 4; ++d )
  {
    designs.push_back( random_aig( 6, 50, 300 + d ) );
  }
  const auto set = build_equiv_pairs( designs, 100, 17 );
  REQUIRE( set.pairs.size() == 100 );
  CHECK( set.positives == 50 );
  CHECK( set.negatives == 50 );
  for ( auto const& p : set.pairs )
  {
    const auto v = equivalent( p.first, p.second ).verdict;
    REQUIRE( v == ( p.equivalent ? equivalence_verdict::equivalent : equivalence_verdict::inequivalent ) );
  }
  CHECK( std::count_if( set.pairs.begin(), set.pairs.end(), []( auto const& p ) { return p.equivalent; } ) == 50 );

  const auto again = build_equiv_pairs( designs, 100, 17 );
  for ( std::size_t i = 0; i < 100; ++i )
  {
    REQUIRE( to_json( again.pairs[i].first ) == to_json( set.pairs[i].first ) );
    REQUIRE( to_json( again.pairs[i].second ) == to_json( set.pairs[i].second ) );
    REQUIRE( again.pairs[i].equivalent == set.pairs[i].equivalent );
  }

  // cones wider than the exhaustive oracle are skipped and counted
  aig_graph wide;
  wide.name = "wide";
  auto acc = wide.add_pi();
  for ( int i = 1; i < 20; ++i )
  {
    const auto x = wide.add_pi();
    const auto a = wide.add_node( node_type::and_gate );
    wide.add_edge( acc, a );
    wide.add_edge( x, a );
    acc = a;
  }
  wide.add_po( acc );
  const auto ws = build_equiv_pairs( { wide, designs[0] }, 10, 1 );
  CHECK( ws.skipped_capacity > 0 );
  for ( auto const& p : ws.pairs )
  {
    CHECK( p.first.pis.size() <= max_exhaustive_inputs );
  }

  auto cfg = tiny_model();
  auto ps = init_model<float>( cfg, 2 );
  const auto rep = evaluate_equivalence( set.pairs, ps, cfg );
  CHECK( rep.scores.size() == 100 );
  CHECK( rep.roc.auc >= 0.0 );
  CHECK( rep.roc.auc <= 1.0 );
  CHECK( rep.to_json()["tp"].get<std::size_t>() + rep.to_json()["fn"].get<std::size_t>() == 50 );

  CHECK_THROWS_AS( build_equiv_pairs( {}, 10, 1 ), eval_error );
}

TEST_CASE( "svg plots", "[eval]" )
{
  const auto svg = svg_line_plot( { { "loss", { 0, 1, 2 }, { 3, 2, 1 } }, { "<b>", { 0, 1 }, { 1, 1 } } },
                                  { "t & t", "step", "loss", 640, 420, true } );
  CHECK( svg.rfind( "<svg", 0 ) == 0 );
  CHECK( std::count( svg.begin(), svg.end(), '\n' ) > 10 );
  CHECK( svg.find( "&lt;b&gt;" ) != std::string::npos );
  CHECK( svg.find( "t &amp; t" ) != std::string::npos );
  CHECK( svg.find( "stroke-dasharray" ) != std::string::npos );
}
