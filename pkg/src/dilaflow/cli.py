"""Command-line front end: ``dilaflow <command> <file> ...``; ``-`` reads stdin / writes stdout."""
import functools
import json
import logging
import math
from typing import Annotated

import typer
from pydantic import BaseModel

from . import config
from .models.flow import FlowPoint, TraceConfig
from .models.geometry import DirectionAngle, EdgeRef
from .models.render import RenderSpec, SaddleConnectionOverlay, TraceOverlay
from .models.surface import Surface
from .schemas import (
    SCHEMAS,
    CylindersResponse,
    GeodesicsResponse,
    SaddleConnectionsResponse,
    cylinder_to_response,
    flat_family_to_response,
    geodesic_to_response,
    horizon_to_response,
    return_map_to_response,
    saddle_connection_to_response,
    surface_info_to_response,
    sweep_to_response,
    trace_to_response,
    veech_to_response,
)
from .services import builders
from .services.horizon_service import horizon_report
from .services.io_service import STDIO, load_surface, surface_id, trace_to_lines, write_surface_file, write_text
from .services.periodic_service import (
    closed_geodesics_in_direction,
    cylinders_in_direction,
    flat_families_in_direction,
    veech_criterion,
)
from .services.render_service import cylinder_overlay, geodesic_overlay, render_surface, render_sweep
from .services.return_map_service import return_map_on_edge
from .services.saddle_service import enumerate_saddle_connections, find_saddle_connection
from .services.sweep_service import sweep as run_sweep
from .services.tracer_service import trace as run_trace
from .utils.custom_exceptions import DilationSurfaceException

logger = logging.getLogger(__name__)

app = typer.Typer(name="dilaflow", help="Straight-line flow on dilation surfaces.", no_args_is_help=True)
make_app = typer.Typer(help="Write one of the example surfaces.", no_args_is_help=True)
app.add_typer(make_app, name="make")

SurfaceArg = Annotated[str, typer.Argument(help="Surface JSON file, or - for stdin.")]
JsonOpt = Annotated[bool, typer.Option("--json", help="Print machine-readable JSON.")]
OutputOpt = Annotated[str, typer.Option("--output", "-o", help="Output file, or - for stdout.")]
DirOpt = Annotated[float, typer.Option("--dir", help="Direction angle in radians.")]
BudgetOpt = Annotated[int, typer.Option("--budget", help="Maximal edge crossings per trajectory.", min=1)]
LengthOpt = Annotated[float, typer.Option("--max-length", help="Maximal chart path length per trajectory.", min=0.0)]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed of every random start.")]


def domain_errors(command):
    """Report domain errors on stderr and exit with status 1."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except DilationSurfaceException as exc:
            typer.echo(f"error: {exc.detail}", err=True)
            raise typer.Exit(code=1) from exc

    return wrapper


def _numbers(text: str, count: int, name: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        values = []
    if len(values) != count:
        raise typer.BadParameter(f"expected {count} comma-separated numbers", param_hint=name)
    return values


def _config(budget: int, max_length: float, seed: int = 0) -> TraceConfig:
    return TraceConfig(max_crossings=budget, max_path_length=max_length or config.MAX_PATH_LENGTH, seed=seed)


def _emit(model: BaseModel, output: str = STDIO) -> None:
    write_text(output, model.model_dump_json(indent=2) + "\n")


def _load(path: str) -> Surface:
    return load_surface(path, eps_geo=config.EPS_GEO)


@app.callback()
def setup(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log debug messages to stderr.")] = False,
):
    config.configure_logging("DEBUG" if verbose else None)


@app.command()
@domain_errors
def validate(path: SurfaceArg):
    """Check a surface file; exit 1 with the reason when it is invalid."""
    s = _load(path)
    typer.echo(f"ok: {s.name} ({surface_id(s)})")


@app.command()
@domain_errors
def info(path: SurfaceArg, as_json: JsonOpt = False):
    """Singularity table, genus and Gauss-Bonnet check."""
    s = _load(path)
    report = surface_info_to_response(s, surface_id(s))
    if as_json:
        _emit(report)
        return
    typer.echo(f"surface     {report.name} ({report.surface_id})")
    typer.echo(f"polygons    {report.polygons}   pairings {report.pairings}")
    typer.echo(f"genus       {report.genus}   components {report.components}   boundary {report.boundary_components}")
    typer.echo(f"marked      {report.marked_points}")
    if report.gauss_bonnet is not None:
        verdict = "ok" if report.gauss_bonnet else "FAILED"
        typer.echo(f"index sum   {report.index_sum} (2g-2 = {2 * report.genus - 2}, {verdict})")
    typer.echo("id  angle/pi  index     ratio       marked")
    for sing in report.singularities:
        index = "boundary" if sing.index is None else str(sing.index)
        typer.echo(
            f"{sing.id:<3} {sing.cone_angle / math.pi:<9.4f} {index:<9} {sing.dilation_ratio:<11.6g} {sing.is_marked}"
        )


@app.command()
@domain_errors
def trace(
    path: SurfaceArg,
    start: Annotated[str, typer.Option("--start", help="Start point as polygon,x,y.")],
    direction: DirOpt,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    max_length: LengthOpt = config.MAX_PATH_LENGTH,
    as_json: JsonOpt = False,
    output: OutputOpt = STDIO,
):
    """Trace one trajectory; writes JSON lines (one per crossing, then the outcome)."""
    pid, x, y = _numbers(start, 3, "--start")
    s = _load(path)
    result = run_trace(s, FlowPoint(int(pid), complex(x, y)), DirectionAngle(direction), _config(budget, max_length))
    if as_json:
        _emit(trace_to_response(result), output)
    else:
        write_text(output, "".join(line + "\n" for line in trace_to_lines(result)))


@app.command("return-map")
@domain_errors
def return_map(
    path: SurfaceArg,
    section: Annotated[str, typer.Option("--section", help="Section edge as polygon,edge.")],
    direction: DirOpt,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    as_json: JsonOpt = False,
):
    """First-return map of the flow on an edge."""
    pid, k = _numbers(section, 2, "--section")
    s = _load(path)
    rmap = return_map_on_edge(s, EdgeRef(int(pid), int(k)), DirectionAngle(direction), _config(budget, 0.0))
    if as_json:
        _emit(return_map_to_response(rmap))
        return
    for b in rmap.branches:
        typer.echo(f"[{b.domain[0]:.9f}, {b.domain[1]:.9f})  x -> {b.slope:.9g} x + {b.offset:.9g}")
    for g in rmap.gaps:
        typer.echo(f"[{g.domain[0]:.9f}, {g.domain[1]:.9f})  gap ({g.reason})")


@app.command()
@domain_errors
def geodesics(
    path: SurfaceArg,
    direction: DirOpt,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    as_json: JsonOpt = False,
):
    """Hyperbolic closed geodesics and flat families parallel to a direction."""
    s = _load(path)
    d = DirectionAngle(direction)
    cfg = _config(budget, 0.0)
    found = closed_geodesics_in_direction(s, d, cfg)
    flats = flat_families_in_direction(s, d, cfg)
    if as_json:
        _emit(
            GeodesicsResponse(
                direction=d.theta,
                geodesics=[geodesic_to_response(g) for g in found],
                flat_families=[flat_family_to_response(f) for f in flats],
            )
        )
        return
    for g in found:
        typer.echo(f"{g.id}  direction {g.direction.theta:.9f}  ratio {g.holonomy:.9g}  crossings {len(g.signature)}")
    for f in flats:
        typer.echo(f"flat family on {tuple(f.section)} over [{f.domain[0]:.6f}, {f.domain[1]:.6f})")
    if not found and not flats:
        typer.echo("no closed geodesics")


@app.command()
@domain_errors
def cylinders(
    path: SurfaceArg,
    direction: Annotated[float | None, typer.Option("--dir", help="Direction angle in radians.")] = None,
    veech: Annotated[bool, typer.Option("--veech", help="Search for a cylinder of angle at least pi.")] = False,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    as_json: JsonOpt = False,
):
    """Maximal hyperbolic cylinders through the geodesics of a direction, or the angle-pi search."""
    if direction is None and not veech:
        raise typer.BadParameter("give --dir or --veech", param_hint="--dir")
    s = _load(path)
    cfg = _config(budget, 0.0)
    if veech:
        verdict = veech_to_response(veech_criterion(s, cfg))
        if as_json:
            _emit(verdict)
        elif verdict.cylinder is not None:
            typer.echo(f"found {verdict.cylinder.id}  extent {verdict.cylinder.angular_extent:.9f}")
        else:
            typer.echo(
                f"no cylinder of angle >= pi among {verdict.geodesics_examined} geodesics "
                f"(grid {verdict.budget}, largest {verdict.largest_extent:.6f})"
            )
        return
    found = cylinders_in_direction(s, DirectionAngle(direction), cfg)
    if as_json:
        _emit(CylindersResponse(cylinders=[cylinder_to_response(c) for c in found]))
        return
    for c in found:
        lo, hi = c.direction_interval
        typer.echo(f"{c.id}  ({lo:.9f}, {hi:.9f})  extent {c.angular_extent:.9f}  ratio {c.core.holonomy:.9g}")


@app.command()
@domain_errors
def saddles(
    path: SurfaceArg,
    bound: Annotated[float, typer.Option("--bound", help="Maximal chart length.", min=0.0)] = 2.0,
    as_json: JsonOpt = False,
):
    """Saddle connections up to a chart length, with the ids ``horizon --sc`` expects."""
    s = _load(path)
    found = enumerate_saddle_connections(s, bound)
    if as_json:
        _emit(SaddleConnectionsResponse(bound=bound, saddle_connections=[saddle_connection_to_response(sc) for sc in found]))
        return
    for sc in found:
        typer.echo(
            f"{sc.id}  {sc.start_singularity} -> {sc.end_singularity}  "
            f"direction {sc.direction.theta:.9f}  length {sc.chart_length:.9g}"
        )


@app.command()
@domain_errors
def horizon(
    path: SurfaceArg,
    sc_id: Annotated[str, typer.Option("--sc", help="Saddle connection id, as listed by saddles.")],
    bound: Annotated[float, typer.Option("--bound", help="Chart length used to look the id up.", min=0.0)] = 4.0,
    directions: Annotated[int, typer.Option("--directions", help="Size of the direction grid.", min=1)] = 16,
    starts: Annotated[int, typer.Option("--starts", help="Random starts per polygon and direction.", min=1)] = 1,
    pencil: Annotated[str | None, typer.Option("--pencil", help="Direction interval lo,hi for a pencil.")] = None,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    seed: SeedOpt = 0,
    as_json: JsonOpt = False,
):
    """Cut test, crossing-count estimate and optional pencil for one saddle connection."""
    interval = tuple(_numbers(pencil, 2, "--pencil")) if pencil else None
    s = _load(path)
    cfg = _config(budget, 0.0, seed)
    sc = find_saddle_connection(s, sc_id, bound, cfg)
    report = horizon_report(s, sc, cfg, directions=directions, starts_per_polygon=starts, pencil_interval=interval)
    if as_json:
        _emit(horizon_to_response(report))
        return
    estimate = report.estimate
    typer.echo(f"saddle connection {sc.id}")
    typer.echo(f"disconnecting     {report.disconnecting} ({report.components} components)")
    typer.echo(f"max crossings     {estimate.global_max} over {estimate.sample_budget.traces} traces")
    typer.echo(f"certified bound   {estimate.certified_bound}")
    typer.echo(f"openness probes   {'passed' if estimate.openness_passed else 'FAILED'}")
    if report.pencil is not None:
        lo, hi = report.pencil.interval
        typer.echo(f"pencil            k={report.pencil.k} ({lo:.9f}, {hi:.9f})")
        if report.pencil.note:
            typer.echo(f"                  {report.pencil.note}")


@app.command()
@domain_errors
def sweep(
    path: SurfaceArg,
    n: Annotated[int, typer.Option("--n", help="Number of uniformly spaced directions.", min=1)] = 100,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    seed: SeedOpt = 0,
    workers: Annotated[int, typer.Option("--workers", help="Worker processes.", min=1)] = config.SWEEP_WORKERS,
    svg: Annotated[str | None, typer.Option("--svg", help="Also write the classification strip as SVG.")] = None,
    as_json: JsonOpt = False,
    output: OutputOpt = STDIO,
):
    """Classify a grid of directions and report hyperbolic-direction density."""
    s = _load(path)
    report = run_sweep(s, n, _config(budget, 0.0, seed), workers=workers)
    if svg:
        write_text(svg, render_sweep(report))
    if as_json or output != STDIO:
        _emit(sweep_to_response(report), output)
        return
    stats = report.density_stats
    counts = {kind: sum(1 for r in report.records if r.cls.kind == kind) for kind in ("morse_smale", "saddle_connection", "unresolved")}
    typer.echo(f"directions        {len(report.records)}")
    typer.echo(f"morse-smale       {counts['morse_smale']} ({report.morse_smale_fraction:.3f})")
    typer.echo(f"saddle connection {counts['saddle_connection']}")
    typer.echo(f"unresolved        {counts['unresolved']}")
    typer.echo(f"hyperbolic bins   {stats.nonempty_hyperbolic_bins}/{stats.bins}")


@app.command()
@domain_errors
def render(
    path: SurfaceArg,
    output: OutputOpt = STDIO,
    start: Annotated[str | None, typer.Option("--trace", help="Overlay a trajectory from polygon,x,y.")] = None,
    direction: Annotated[float, typer.Option("--dir", help="Direction of the overlays in radians.")] = 0.0,
    geodesics_overlay: Annotated[bool, typer.Option("--geodesics", help="Overlay closed geodesics in --dir.")] = False,
    cylinders_overlay: Annotated[bool, typer.Option("--cylinders", help="Shade cylinders through --dir.")] = False,
    sc_id: Annotated[str | None, typer.Option("--sc", help="Overlay a saddle connection by id.")] = None,
    bound: Annotated[float, typer.Option("--bound", help="Chart length used to look --sc up.", min=0.0)] = 4.0,
    budget: BudgetOpt = config.MAX_CROSSINGS,
    no_labels: Annotated[bool, typer.Option("--no-labels", help="Omit pairing labels.")] = False,
):
    """SVG picture of the polygon net with optional overlays."""
    point = _numbers(start, 3, "--trace") if start else None
    s = _load(path)
    cfg = _config(budget, 0.0)
    d = DirectionAngle(direction)
    overlays = []
    if cylinders_overlay:
        overlays.extend(cylinder_overlay(s, c) for c in cylinders_in_direction(s, d, cfg, with_boundary=False))
    if geodesics_overlay:
        overlays.extend(geodesic_overlay(s, g) for g in closed_geodesics_in_direction(s, d, cfg))
    if sc_id:
        overlays.append(SaddleConnectionOverlay(find_saddle_connection(s, sc_id, bound, cfg)))
    if point:
        overlays.append(TraceOverlay(run_trace(s, FlowPoint(int(point[0]), complex(point[1], point[2])), d, cfg)))
    write_text(output, render_surface(RenderSpec(surface=s, overlays=tuple(overlays), labels=not no_labels)))


@app.command()
def schema(name: Annotated[str, typer.Argument(help=f"One of: {', '.join(SCHEMAS)}.")]):
    """Print the published JSON schema of a file or report."""
    if name not in SCHEMAS:
        raise typer.BadParameter(f"unknown schema; choose from {', '.join(SCHEMAS)}", param_hint="name")
    typer.echo(json.dumps(SCHEMAS[name].model_json_schema(), indent=2, sort_keys=True))


@make_app.command("torus")
def make_torus(output: OutputOpt = STDIO):
    """Unit square with opposite sides glued by translations."""
    write_surface_file(builders.torus_file(), output)


@make_app.command("cylinder")
@domain_errors
def make_cylinder(
    rho: Annotated[float, typer.Option("--rho", help="Dilation ratio in (0, 1).")] = 0.5,
    alpha: Annotated[float, typer.Option("--alpha", help="Opening angle in (0, 2 pi).")] = math.pi / 3,
    output: OutputOpt = STDIO,
):
    """Dilation cylinder of ratio rho and opening angle alpha."""
    write_surface_file(builders.dilation_cylinder_file(rho, alpha), output)


@make_app.command("two-chamber")
def make_two_chamber(output: OutputOpt = STDIO):
    """Genus-two surface made of two slit dilation tori."""
    write_surface_file(builders.two_chamber_file(), output)


def main() -> None:
    app()
