use std::collections::BTreeSet;

use episodic::datagen::{generate, standard_embeddings, GenConfig};
use episodic::fsm::count_fsm;
use episodic::mapconcat::count_mapconcat;
use episodic::miner::{mine, MiningConfig};
use episodic::oracle::{enumerate_all, max_nonoverlap};
use episodic::scan::{compact_flags, count_scan_write, exclusive_scan, parallel_map_collect};
use episodic::tracking::greedy_schedule;
use episodic::{
    format_episode, load_stream, parse_episode, write_stream, CompactionStrategy, Counter, Direction, Episode,
    EventStream, EventType, IntervalConstraint, OccurrenceInterval, SymbolTable, Tracker, TypeIndex, Workers,
};
use proptest::prelude::*;

const NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

fn stream_strategy(max_events: usize) -> impl Strategy<Value = EventStream> {
    (1usize..=4, 0..=max_events).prop_flat_map(|(alphabet, n)| {
        (Just(alphabet), prop::collection::vec((0..alphabet as u32, 0u64..6), n)).prop_map(|(alphabet, raw)| {
            let mut t = 0;
            let events = raw
                .into_iter()
                .map(|(ty, dt)| {
                    t += dt;
                    (EventType(ty), t)
                })
                .collect();
            EventStream::new(events, alphabet).unwrap()
        })
    })
}

fn constraint_strategy() -> impl Strategy<Value = IntervalConstraint> {
    prop_oneof![
        Just((0, 5)),
        Just((5, 10)),
        Just((2, 7)),
        (0u64..8, 1u64..8).prop_map(|(l, w)| (l, l + w)),
    ]
    .prop_map(|(l, h)| IntervalConstraint::new(l, h).unwrap())
}

fn episode_strategy(alphabet: usize) -> impl Strategy<Value = Episode> {
    (1usize..=4).prop_flat_map(move |n| {
        (prop::collection::vec(0..alphabet as u32, n), prop::collection::vec(constraint_strategy(), n - 1))
            .prop_map(|(types, cs)| Episode::new(types.into_iter().map(EventType).collect(), cs))
    })
}

fn instance(max_events: usize) -> impl Strategy<Value = (EventStream, Episode)> {
    stream_strategy(max_events).prop_flat_map(|s| {
        let alphabet = s.alphabet_size();
        (Just(s), episode_strategy(alphabet))
    })
}

fn symbols(alphabet: usize) -> SymbolTable {
    SymbolTable::from_names(NAMES[..alphabet].iter().copied())
}

fn truth(stream: &EventStream, episode: &Episode) -> u64 {
    max_nonoverlap(&enumerate_all(stream, episode).unwrap())
}

fn all_tracking() -> impl Iterator<Item = (Direction, CompactionStrategy)> {
    Direction::ALL.into_iter().flat_map(|d| CompactionStrategy::ALL.into_iter().map(move |s| (d, s)))
}

proptest! {
    #[test]
    fn scan_is_a_running_sum(values in prop::collection::vec(0u64..1_000_000, 0..300), threads in 1usize..5) {
        let out = exclusive_scan(&values, &Workers::new(threads)).unwrap();
        prop_assert_eq!(out.len(), values.len());
        let mut acc = 0;
        for (o, v) in out.iter().zip(&values) {
            prop_assert_eq!(*o, acc);
            acc += v;
        }
    }

    #[test]
    fn compaction_keeps_flagged_in_order(pairs in prop::collection::vec((any::<u32>(), any::<bool>()), 0..300), threads in 1usize..5) {
        let (values, flags): (Vec<u32>, Vec<bool>) = pairs.iter().copied().unzip();
        let expected: Vec<u32> = pairs.iter().filter(|p| p.1).map(|p| p.0).collect();
        prop_assert_eq!(compact_flags(&values, &flags, &Workers::new(threads)).unwrap(), expected);
    }

    #[test]
    fn count_scan_write_matches_flat_map(counts in prop::collection::vec(0usize..6, 0..200), threads in 1usize..5) {
        let out = count_scan_write(
            counts.len(),
            |i| counts[i],
            |i, slots: &mut [(usize, usize)]| for (k, s) in slots.iter_mut().enumerate() { *s = (i, k) },
            &Workers::new(threads),
        ).unwrap();
        let expected: Vec<(usize, usize)> = counts.iter().enumerate().flat_map(|(i, &c)| (0..c).map(move |k| (i, k))).collect();
        prop_assert_eq!(out, expected);
    }

    #[test]
    fn map_collect_is_ordered_and_reports_first_error(
        inputs in prop::collection::vec(0u32..50, 0..200),
        threads in 1usize..5,
    ) {
        let per = |&x: &u32, out: &mut Vec<u32>| -> Result<(), u32> {
            if x == 49 { return Err(x); }
            out.extend(std::iter::repeat_n(x, (x % 3) as usize));
            Ok(())
        };
        let got = parallel_map_collect(&inputs, per, &Workers::new(threads));
        if inputs.contains(&49) {
            prop_assert_eq!(got, Err(49));
        } else {
            let expected: Vec<u32> = inputs.iter().flat_map(|&x| std::iter::repeat_n(x, (x % 3) as usize)).collect();
            prop_assert_eq!(got, Ok(expected));
        }
    }

    #[test]
    fn event_file_round_trip(stream in stream_strategy(80)) {
        let sym = symbols(stream.alphabet_size());
        let mut buf = Vec::new();
        write_stream(&stream, &sym, &mut buf).unwrap();
        let (back, back_sym) = load_stream(buf.as_slice()).unwrap();
        prop_assert_eq!(back.times(), stream.times());
        let names: Vec<_> = back.types().iter().map(|&t| back_sym.name(t).unwrap().to_string()).collect();
        let expected: Vec<_> = stream.types().iter().map(|&t| sym.name(t).unwrap().to_string()).collect();
        prop_assert_eq!(names, expected);
    }

    #[test]
    fn episode_text_round_trip(episode in episode_strategy(4)) {
        let sym = symbols(4);
        let text = format_episode(&episode, &sym);
        prop_assert_eq!(parse_episode(&text, &sym).unwrap(), episode);
    }

    #[test]
    fn type_index_partitions_positions(stream in stream_strategy(120)) {
        let index = TypeIndex::build(&stream);
        let mut all = Vec::new();
        for ty in 0..stream.alphabet_size() as u32 {
            let ty = EventType(ty);
            let pos = index.positions(ty);
            prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(pos.iter().all(|&p| stream.event_type(p) == ty));
            prop_assert_eq!(index.times(ty).to_vec(), pos.iter().map(|&p| stream.time(p)).collect::<Vec<_>>());
            all.extend_from_slice(pos);
        }
        all.sort_unstable();
        prop_assert_eq!(all, (0..stream.len()).collect::<Vec<_>>());
    }

    #[test]
    fn greedy_matches_brute_force(mut raw in prop::collection::vec((0u64..40, 0u64..8), 0..40)) {
        let mut intervals: Vec<OccurrenceInterval> = raw.drain(..).map(|(s, d)| OccurrenceInterval::new(s, s + d)).collect();
        intervals.sort_by_key(|o| o.end);
        prop_assert_eq!(greedy_schedule(&intervals).unwrap(), max_nonoverlap(&intervals));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fsm_matches_oracle((stream, episode) in instance(150)) {
        prop_assert_eq!(count_fsm(&stream, &episode), truth(&stream, &episode));
    }

    #[test]
    fn tracking_matches_oracle_in_every_configuration((stream, episode) in instance(150)) {
        let expected = truth(&stream, &episode);
        let index = TypeIndex::build(&stream);
        for threads in [1, 3] {
            let workers = Workers::new(threads);
            for (d, s) in all_tracking() {
                let result = Tracker::new(&stream, &index, &workers).direction(d).strategy(s).count_detailed(&episode);
                prop_assert_eq!(result.count, expected, "{} {} workers={}", d, s, threads);
                prop_assert!(!result.sort_fallback, "{} {} produced unsorted intervals", d, s);
            }
        }
    }

    #[test]
    fn tracked_intervals_are_real_occurrences((stream, episode) in instance(120)) {
        let all: BTreeSet<_> = enumerate_all(&stream, &episode).unwrap();
        let index = TypeIndex::build(&stream);
        let workers = Workers::new(2);
        for (d, s) in all_tracking() {
            let found = Tracker::new(&stream, &index, &workers).direction(d).strategy(s).find_occurrences(&episode);
            prop_assert!(found.iter().all(|o| all.contains(o)));
        }
    }

    #[test]
    fn tracking_output_independent_of_workers((stream, episode) in instance(150), strategy in 0usize..3) {
        let index = TypeIndex::build(&stream);
        let s = CompactionStrategy::ALL[strategy];
        for d in Direction::ALL {
            let base = Tracker::new(&stream, &index, &Workers::inline()).direction(d).strategy(s).find_occurrences(&episode);
            for threads in [2, 4] {
                let w = Workers::new(threads);
                let other = Tracker::new(&stream, &index, &w).direction(d).strategy(s).find_occurrences(&episode);
                prop_assert_eq!(&other, &base);
            }
        }
    }

    #[test]
    fn mapconcat_matches_oracle_for_any_segment_count((stream, episode) in instance(150)) {
        let expected = truth(&stream, &episode);
        for p in [1, 2, 3, 7] {
            prop_assert_eq!(count_mapconcat(&stream, &episode, p, &Workers::new(2)), expected, "P={}", p);
        }
    }

    #[test]
    fn prefix_counts_never_exceed_full_count((stream, episode) in instance(150), cut in 0.0f64..1.0) {
        let prefix = stream.slice(0..(stream.len() as f64 * cut) as usize);
        prop_assert!(count_fsm(&prefix, &episode) <= count_fsm(&stream, &episode));
    }

    #[test]
    fn single_node_counts_distinct_times(stream in stream_strategy(150), ty in 0u32..4) {
        let ty = EventType(ty % stream.alphabet_size() as u32);
        let times: BTreeSet<u64> = stream.iter().filter(|e| e.0 == ty).map(|e| e.1).collect();
        let episode = Episode::single(ty);
        prop_assert_eq!(count_fsm(&stream, &episode), times.len() as u64);
        let index = TypeIndex::build(&stream);
        prop_assert_eq!(Tracker::new(&stream, &index, &Workers::inline()).count(&episode), times.len() as u64);
    }

    #[test]
    fn sub_episodes_are_at_least_as_frequent((stream, episode) in instance(150)) {
        let n = episode.len();
        let full = count_fsm(&stream, &episode);
        if n > 1 {
            prop_assert!(count_fsm(&stream, &episode.sub_episode(0..n - 1)) >= full);
            prop_assert!(count_fsm(&stream, &episode.sub_episode(1..n)) >= full);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mining_is_backend_independent_and_anti_monotone(stream in stream_strategy(120), threshold in 1u64..6) {
        let constraints = vec![IntervalConstraint::new(0, 5).unwrap(), IntervalConstraint::new(2, 7).unwrap()];
        let mut config = MiningConfig::new(threshold, constraints);
        config.max_level = 4;
        config.strategy_switch_level = 2;
        let workers = Workers::new(2);
        let reference = mine(&stream, &config, &workers).unwrap();
        let reference_rows: Vec<_> = reference.frequent().map(|(l, e, c)| (l, e.clone(), c)).collect();
        for counter in [
            Counter::Fsm,
            Counter::MapConcat { segments: 3 },
            Counter::Tracking { direction: Direction::Backward, strategy: CompactionStrategy::FlagCompact },
            Counter::Tracking { direction: Direction::Forward, strategy: CompactionStrategy::ConcurrentAppend },
        ] {
            config.counter = counter;
            let rows: Vec<_> = mine(&stream, &config, &workers).unwrap().frequent().map(|(l, e, c)| (l, e.clone(), c)).collect();
            prop_assert_eq!(&rows, &reference_rows, "{}", counter);
        }
        let frequent: BTreeSet<Episode> = reference_rows.iter().map(|r| r.1.clone()).collect();
        for (level, episode, count) in &reference_rows {
            prop_assert!(*count >= threshold);
            if *level > 1 {
                prop_assert!(frequent.contains(&episode.sub_episode(0..level - 1)));
                prop_assert!(frequent.contains(&episode.sub_episode(1..*level)));
            }
        }
    }

    #[test]
    fn generator_is_deterministic_and_truthful(seed in any::<u64>(), rate in 0.5f64..8.0) {
        let c = IntervalConstraint::new(5, 10).unwrap();
        let config = GenConfig {
            neurons: 12,
            duration_s: 3.0,
            base_rate_hz: 4.0,
            embedded: standard_embeddings(12, 2, 3, c, rate, seed),
            seed,
        };
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        prop_assert_eq!(&a.stream, &b.stream);
        prop_assert_eq!(&a.injections, &b.injections);
        let index = TypeIndex::build(&a.stream);
        for ((episode, _), log) in config.embedded.iter().zip(&a.injections) {
            for occ in log {
                prop_assert!(episodic::oracle::has_occurrence(&a.stream, episode, *occ));
            }
            let counted = Tracker::new(&a.stream, &index, &Workers::inline()).count(episode);
            prop_assert!(counted >= max_nonoverlap(log));
        }
    }
}

#[test]
fn type_index_at_dataset_scale() {
    let data = generate(&GenConfig { duration_s: 512.0, seed: 5, ..GenConfig::default() }).unwrap();
    let stream = &data.stream;
    assert!(stream.len() > 600_000);
    let index = TypeIndex::build(stream);
    assert_eq!(index.total(), stream.len());
    let mut seen = vec![false; stream.len()];
    for ty in 0..64 {
        for &p in index.positions(EventType(ty)) {
            assert!(!seen[p]);
            seen[p] = true;
        }
    }
    assert!(seen.into_iter().all(|s| s));
}
