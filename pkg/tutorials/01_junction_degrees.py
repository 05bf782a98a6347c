"""Coalition values and responsibility degrees on the bundled junction model."""

from respgames import attributable_value, bcr_degree, load_model, parse_path_formula, value_table
from respgames.fixtures import data_path

model = load_model(data_path("junction.csg"))
game = model.game

for name in ("p_nb", "p_brake", "p_half"):
    profile = model.profiles[name]
    for text in ('X "crash"', 'X "pass"'):
        outcome = parse_path_formula(text, game.agents)
        table = value_table(game, profile, outcome)
        print(f"{name:8s} {text:10s}", end="")
        for coalition, v in table.rows():
            print(f"  v{{{','.join(coalition)}}}={v:.4g}", end="")
        degrees = {a: bcr_degree(game, profile, outcome, a, table=table) for a in game.agents}
        ups = attributable_value(game, profile, outcome)
        print(f"  | D={ {a: round(d, 4) for a, d in degrees.items()} } total={ups:.4g}")
