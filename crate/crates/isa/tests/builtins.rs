//! Builtin programs against the functional model.

use pqproc_core::dilithium::{Dilithium, DilithiumLevel, DilithiumMultiplier};
use pqproc_core::keccak::{sha3_256, sha3_512};
use pqproc_core::saber::{SaberKem, SaberLevel, SaberMultiplier};
use pqproc_core::PrimeCtx;
use pqproc_isa::{builtin_program, builtin_program_with, run, verify_accepted, Builtin, BuiltinOptions, Memory, Mode, RunOutput, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exec(bt: &Builtin, inputs: &[(&str, &[u8])]) -> RunOutput {
    let mut mem = Memory::new();
    for (name, data) in inputs {
        bt.load(&mut mem, name, data).unwrap();
    }
    let cfg = SimConfig::default();
    let par = run(&bt.program, mem.clone(), Mode::Parallel, &cfg).unwrap();
    let ser = run(&bt.program, mem, Mode::Serial, &cfg).unwrap();
    assert!(par.memory.same_data(&ser.memory), "{}: serial and parallel differ", bt.name);
    assert_eq!(par.registers, ser.registers);
    assert!(par.trace.total_cycles < ser.trace.total_cycles, "{}", bt.name);
    par
}

fn bytes<const K: usize>(rng: &mut ChaCha8Rng) -> [u8; K] {
    let mut b = [0u8; K];
    rng.fill(&mut b[..]);
    b
}

const SABER_LEVELS: [(&str, SaberLevel); 3] = [
    ("lightsaber", SaberLevel::LightSaber),
    ("saber", SaberLevel::Saber),
    ("firesaber", SaberLevel::FireSaber),
];

#[test]
fn saber_programs_match_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, lvl) in SABER_LEVELS {
        let kem = SaberKem::new(lvl, SaberMultiplier::default());
        let (seed_a, noise, z) = (bytes::<32>(&mut rng), bytes::<32>(&mut rng), bytes::<32>(&mut rng));
        let want = kem.keygen_from(&seed_a, &noise, &z).unwrap();

        let kg = builtin_program("saber", "keygen", name).unwrap();
        let out = exec(&kg, &[("seed_a", &seed_a), ("noise", &noise), ("z", &z)]);
        assert_eq!(kg.read(&out.memory, "pk").unwrap(), want.pk, "{name} pk");
        assert_eq!(kg.read(&out.memory, "sk").unwrap(), want.sk, "{name} sk");

        let coins = bytes::<32>(&mut rng);
        let (ct, ss) = kem.encaps_from(&want.pk, &coins).unwrap();
        let en = builtin_program("saber", "encaps", name).unwrap();
        let out = exec(&en, &[("coins", &coins), ("pk", &want.pk)]);
        assert_eq!(en.read(&out.memory, "ct").unwrap(), ct, "{name} ct");
        assert_eq!(en.read(&out.memory, "ss").unwrap(), ss.to_vec(), "{name} ss");

        // The encryption core of the same encapsulation.
        let msg = sha3_256(&coins);
        let mut buf = msg.to_vec();
        buf.extend_from_slice(&sha3_256(&want.pk));
        let kr = sha3_512(&buf);
        let pke = builtin_program("saber", "encrypt", name).unwrap();
        let out = exec(&pke, &[("msg", &msg), ("noise", &kr[32..]), ("pk", &want.pk)]);
        assert_eq!(pke.read(&out.memory, "ct").unwrap(), ct, "{name} encrypt");

        let de = builtin_program("saber", "decaps", name).unwrap();
        let out = exec(&de, &[("sk", &want.sk), ("ct", &ct)]);
        assert_eq!(de.read(&out.memory, "ss").unwrap(), ss.to_vec(), "{name} decaps");

        let mut bad = ct.clone();
        bad[7] ^= 0x20;
        let implicit = kem.decaps(&want.sk, &bad).unwrap();
        assert_ne!(implicit, ss);
        let out = exec(&de, &[("sk", &want.sk), ("ct", &bad)]);
        assert_eq!(de.read(&out.memory, "ss").unwrap(), implicit.to_vec(), "{name} implicit rejection");
    }
}

#[test]
fn saber_programs_with_smaller_primes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for bits in [23, 24] {
        let opts = BuiltinOptions { prime_bits: bits, ..Default::default() };
        let kem = SaberKem::new(SaberLevel::Saber, SaberMultiplier::Ntt(PrimeCtx::from_bits(bits).unwrap()));
        let kp = kem.keygen_from(&bytes(&mut rng), &bytes(&mut rng), &bytes(&mut rng)).unwrap();
        let coins = bytes::<32>(&mut rng);
        let (ct, ss) = kem.encaps_from(&kp.pk, &coins).unwrap();
        let en = builtin_program_with("saber", "encaps", "saber", &opts).unwrap();
        let out = exec(&en, &[("coins", &coins), ("pk", &kp.pk)]);
        assert_eq!(en.read(&out.memory, "ct").unwrap(), ct);
        let de = builtin_program_with("saber", "decaps", "saber", &opts).unwrap();
        let out = exec(&de, &[("sk", &kp.sk), ("ct", &ct)]);
        assert_eq!(de.read(&out.memory, "ss").unwrap(), ss.to_vec());
    }
}

const DIL_LEVELS: [(&str, DilithiumLevel); 3] = [
    ("2", DilithiumLevel::Dilithium2),
    ("3", DilithiumLevel::Dilithium3),
    ("5", DilithiumLevel::Dilithium5),
];

/// A message whose signature needs exactly `iterations` attempts when that
/// is `1`, or at least `iterations` otherwise.
fn message_with(d: &Dilithium, sk: &[u8], rng: &mut ChaCha8Rng, iterations: u32) -> ([u8; 32], Vec<u8>, u32) {
    loop {
        let msg = bytes::<32>(rng);
        let out = d.sign(sk, &msg).unwrap();
        let ok = if iterations == 1 { out.iterations == 1 } else { out.iterations >= iterations };
        if ok {
            return (msg, out.signature, out.iterations);
        }
    }
}

#[test]
fn dilithium_programs_match_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, lvl) in DIL_LEVELS {
        let d = Dilithium::new(lvl, DilithiumMultiplier::Ntt);
        let seed = bytes::<32>(&mut rng);
        let kp = d.keygen_from_seed(&seed).unwrap();
        let kg = builtin_program("dilithium", "keygen", name).unwrap();
        let out = exec(&kg, &[("seed", &seed)]);
        assert_eq!(kg.read(&out.memory, "pk").unwrap(), kp.pk, "{name} pk");
        assert_eq!(kg.read(&out.memory, "sk").unwrap(), kp.sk, "{name} sk");

        let sign = builtin_program("dilithium", "sign", name).unwrap();
        for want_iters in [1, 3] {
            let (msg, sig, iters) = message_with(&d, &kp.sk, &mut rng, want_iters);
            let out = exec(&sign, &[("sk", &kp.sk), ("msg", &msg)]);
            assert_eq!(sign.read(&out.memory, "sig").unwrap(), sig, "{name} signature after {iters} attempts");
            assert_eq!(out.trace.iterations, iters);
            assert_eq!(out.registers.kappa, iters - 1);

            let ver = builtin_program("dilithium", "verify", name).unwrap();
            let out = exec(&ver, &[("pk", &kp.pk), ("msg", &msg), ("sig", &sig)]);
            assert!(verify_accepted(&out.registers), "{name} verify");
            let mut other = msg;
            other[0] ^= 1;
            let out = exec(&ver, &[("pk", &kp.pk), ("msg", &other), ("sig", &sig)]);
            assert!(!verify_accepted(&out.registers), "{name} wrong message");
            let mut bad = sig.clone();
            let last = bad.len() - 1;
            bad[last] = 0xff;
            let out = exec(&ver, &[("pk", &kp.pk), ("msg", &msg), ("sig", &bad)]);
            assert!(!verify_accepted(&out.registers) && out.registers.reject, "{name} malformed hint");
        }
    }
}

#[test]
fn signing_phases_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = Dilithium::new(DilithiumLevel::Dilithium3, DilithiumMultiplier::Ntt);
    let kp = d.keygen_from_seed(&bytes(&mut rng)).unwrap();
    let (msg, sig, _) = message_with(&d, &kp.sk, &mut rng, 1);
    let cfg = SimConfig::default();
    let pre = builtin_program("dilithium", "sign_pre", "3").unwrap();
    let body = builtin_program("dilithium", "sign_loop", "3").unwrap();
    let post = builtin_program("dilithium", "sign_post", "3").unwrap();
    let mut mem = Memory::new();
    pre.load(&mut mem, "sk", &kp.sk).unwrap();
    pre.load(&mut mem, "msg", &msg).unwrap();
    let a = run(&pre.program, mem, Mode::Parallel, &cfg).unwrap();
    let b = run(&body.program, a.memory, Mode::Parallel, &cfg).unwrap();
    assert_eq!(b.trace.iterations, 1);
    let c = run(&post.program, b.memory, Mode::Parallel, &cfg).unwrap();
    assert_eq!(post.read(&c.memory, "sig").unwrap(), sig);
}
