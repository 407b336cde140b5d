"""Replay the packaged critical interaction and inspect its metrics.

A cyclist arrives while the pedestrian is mid-crossing; the pedestrian
brakes to a stop, lets the cyclist pass, and continues.  The record lands
in the critical catalog: near-zero PET plus non-ordinary motion.  The
time-to-arrival series uses the predicted conflict area frozen at the
deceleration onset.
"""

from pvimine import RunParams, default_scene, generate, packaged_scenario, run_pipeline

spec = packaged_scenario("critical_replay")
ped, veh, truth = generate(spec)
print(f"truth: PET {truth.pet:+.3f} s, deceleration onset t_d = {truth.t_d} s")

# t_p would normally come from a manual annotation of the perception moment
result = run_pipeline([ped, veh], default_scene(), RunParams(),
                      annotations={"ped": {"t_p": 2.0}})
rec = result.critical_records[0]

print(f"critical record: PET {rec.pet:+.3f} s, residual_std "
      f"{rec.residual_std:.4f} m/s ({rec.motion_class})")
print(f"detected reaction: t_d {rec.reaction.t_d:.2f} s, "
      f"t_f {rec.reaction.t_f:.2f} s, annotated t_p {rec.reaction.t_p}")
print(f"TTA at t_p: {rec.tta_at[1]:.2f} s")
print("first TTA samples after onset:")
for t, d, v, tta in rec.tta_samples[:5]:
    print(f"  t {t:5.2f}  distance {d:5.2f} m  speed {v:4.2f} m/s  tta {tta:.2f} s")
