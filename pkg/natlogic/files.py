import json
import os
import re
from dataclasses import dataclass, field
from io import StringIO
from typing import Any, Iterator, Optional, TextIO

from .logic import LogicPresentation, Rule, SearchBounds
from .terms import FiniteStructure, Homomorphism, Signature, VarSet

Records = dict[str, Any]

HOM_ENTRY = re.compile(r"(\S+?)\s*->\s*(\S+)")


class PresentationFormatError(ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None, filename: Optional[str] = None):
        where = filename or "line"
        prefix = f"{where} {line_number}: " if line_number is not None else (f"{filename}: " if filename else "")
        super().__init__(f"{prefix}{message}")
        self.message = message
        self.line_number = line_number
        self.filename = filename


class LogicDataFile:
    """Basic class for the line based text formats.
    Subclasses map each leading keyword to a handler in `definitions`.
    """

    default_filename: str = None
    comment: str = "#"
    definitions: dict[str, str] = {}

    def __init__(self, base_path: str = "."):
        self.base_path = base_path

    def default_file_path(self) -> str:
        return os.path.join(self.base_path, self.default_filename)

    def empty_records(self) -> Records:
        return {}

    @classmethod
    def split_lines(cls, buffer: TextIO) -> Iterator[tuple[int, str, str]]:
        for number, line in enumerate(buffer, start=1):
            line = line.split(cls.comment, 1)[0].strip()
            if not line:
                continue
            keyword, _, rest = line.partition(" ")
            yield number, keyword, rest.strip()

    def read(self, buffer: TextIO) -> Records:
        records = self.empty_records()
        for number, keyword, rest in self.split_lines(buffer):
            handler = self.definitions.get(keyword)
            if handler is None:
                raise PresentationFormatError(f"unknown keyword {keyword!r}", number)
            try:
                getattr(self, handler)(records, rest, number)
            except PresentationFormatError:
                raise
            except ValueError as e:
                raise PresentationFormatError(str(e), number) from e
        return records

    def write(self, records: Records) -> str:
        raise NotImplementedError

    def read_file(self, filename: str = None) -> Records:
        filename = filename or self.default_file_path()
        with open(filename, "r", encoding="utf-8") as file:
            try:
                return self.read(file)
            except PresentationFormatError as e:
                raise PresentationFormatError(e.message, e.line_number, filename) from e

    def write_file(self, records: Records, filename: str = None) -> None:
        filename = filename or self.default_file_path()
        with open(filename, "w", encoding="utf-8") as file:
            file.write(self.write(records))

    def loads(self, text: str) -> Records:
        return self.read(StringIO(text))

    def dump(self, filename: str = None, json_filename: str = None) -> None:
        filename = filename or self.default_file_path()
        json_filename = json_filename or (filename.rpartition(".")[0] + ".json")
        data = {os.path.basename(filename): self.read_file(filename)}

        with open(json_filename, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=4, ensure_ascii=False)

    def load(self, json_filename: str, filename: str = None) -> None:
        with open(json_filename, "r", encoding="utf-8") as f:
            data = json.load(f)
        name, records = next(iter(data.items()))
        self.write_file(records, filename or os.path.join(self.base_path, name))


class PresentationFile(LogicDataFile):
    default_filename = "logic.logic"
    definitions = {
        "name": "read_name",
        "sig": "read_signature",
        "vars": "read_variables",
        "rule": "read_rule",
        "bounds": "read_bounds",
    }

    def empty_records(self) -> Records:
        return {"name": None, "signature": [], "variables": [], "rules": [], "bounds": None}

    def read_name(self, records: Records, rest: str, number: int) -> None:
        records["name"] = rest

    def read_signature(self, records: Records, rest: str, number: int) -> None:
        records["signature"] += [list(pair) for pair in Signature.parse(rest).connectives]

    def read_variables(self, records: Records, rest: str, number: int) -> None:
        records["variables"] += list(VarSet.parse(rest))

    def read_rule(self, records: Records, rest: str, number: int) -> None:
        premises, sep, conclusion = rest.partition("=>")
        if not sep:
            raise PresentationFormatError("rule needs '=>'", number)
        if not conclusion.strip():
            raise PresentationFormatError("rule needs a conclusion", number)
        records["rules"].append({"premises": premises.strip(), "conclusion": conclusion.strip(), "line": number})

    def read_bounds(self, records: Records, rest: str, number: int) -> None:
        bounds = SearchBounds.parse(rest)
        records["bounds"] = {"depth": bounds.max_depth, "iters": bounds.max_iterations}

    def write(self, records: Records) -> str:
        lines = []
        if records.get("name"):
            lines.append(f"name {records['name']}")
        lines.append("sig " + " ".join(f"{name}:{arity}" for name, arity in records["signature"]))
        lines.append("vars " + " ".join(records["variables"]))
        for rule in records["rules"]:
            premises = f"{rule['premises']} " if rule["premises"] else ""
            lines.append(f"rule {premises}=> {rule['conclusion']}")
        if records.get("bounds"):
            lines.append(f"bounds depth={records['bounds']['depth']} iters={records['bounds']['iters']}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def build(records: Records, name: Optional[str] = None) -> LogicPresentation:
        try:
            signature = Signature(tuple(tuple(pair) for pair in records["signature"]))
            variables = VarSet(tuple(records["variables"]))
        except ValueError as e:
            raise PresentationFormatError(str(e)) from e
        rules = []
        for rule in records["rules"]:
            try:
                rules.append(Rule.parse(f"{rule['premises']} => {rule['conclusion']}", signature, variables))
            except ValueError as e:
                raise PresentationFormatError(str(e), rule.get("line")) from e
        bounds = SearchBounds()
        if records.get("bounds"):
            bounds = SearchBounds(records["bounds"]["depth"], records["bounds"]["iters"])
        try:
            return LogicPresentation(signature, variables, tuple(rules), bounds, name or records.get("name") or "l")
        except ValueError as e:
            raise PresentationFormatError(str(e)) from e

    @staticmethod
    def records_of(presentation: LogicPresentation) -> Records:
        return {
            "name": presentation.name,
            "signature": [list(pair) for pair in presentation.signature.connectives],
            "variables": list(presentation.variables),
            "rules": [
                {
                    "premises": ", ".join(str(p) for p in rule.premises),
                    "conclusion": str(rule.conclusion),
                }
                for rule in presentation.rules
            ],
            "bounds": {"depth": presentation.bounds.max_depth, "iters": presentation.bounds.max_iterations},
        }

    def read_presentation(self, filename: str = None) -> LogicPresentation:
        records = self.read_file(filename)
        default_name = os.path.splitext(os.path.basename(filename or self.default_file_path()))[0]
        try:
            return self.build(records, records.get("name") or default_name)
        except PresentationFormatError as e:
            raise PresentationFormatError(e.message, e.line_number, filename) from e

    def parse_presentation(self, text: str, name: Optional[str] = None) -> LogicPresentation:
        return self.build(self.loads(text), name)


class WitnessFile(PresentationFile):
    default_filename = "witness.logic"
    definitions = {
        **PresentationFile.definitions,
        "extend": "read_extend",
        "claim": "read_claim",
        "premises": "read_premises",
        "lemmas": "read_lemmas",
        "goal": "read_goal",
        "subst": "read_substitution",
        "count": "read_count",
    }

    def empty_records(self) -> Records:
        records = super().empty_records()
        records.update({"extend": [], "claim": None, "premises": None, "lemmas": None, "goal": None, "subst": [], "count": None})
        return records

    def read_extend(self, records: Records, rest: str, number: int) -> None:
        records["extend"] = list(VarSet.parse(rest))

    def read_claim(self, records: Records, rest: str, number: int) -> None:
        records["claim"] = rest

    def read_premises(self, records: Records, rest: str, number: int) -> None:
        records["premises"] = rest

    def read_lemmas(self, records: Records, rest: str, number: int) -> None:
        records["lemmas"] = rest

    def read_goal(self, records: Records, rest: str, number: int) -> None:
        records["goal"] = rest

    def read_substitution(self, records: Records, rest: str, number: int) -> None:
        name, sep, term = rest.partition(":=")
        if not sep or not name.strip() or not term.strip():
            raise PresentationFormatError("expected 'subst <var> := <formula>'", number)
        records["subst"].append([name.strip(), term.strip()])

    def read_count(self, records: Records, rest: str, number: int) -> None:
        if not rest.isdigit():
            raise PresentationFormatError("count needs a number", number)
        records["count"] = int(rest)

    def write(self, records: Records) -> str:
        lines = [super().write(records).rstrip("\n")]
        if records.get("extend"):
            lines.append("extend " + " ".join(records["extend"]))
        lines.append(f"claim {records['claim']}")
        for key in ("premises", "lemmas"):
            if records.get(key) is not None:
                lines.append(f"{key} {records[key]}".rstrip())
        if records.get("goal"):
            lines.append(f"goal {records['goal']}")
        for name, term in records.get("subst") or []:
            lines.append(f"subst {name} := {term}")
        if records.get("count") is not None:
            lines.append(f"count {records['count']}")
        return "\n".join(lines) + "\n"


@dataclass
class StructureCatalog:
    signature: Signature
    structures: dict[str, FiniteStructure] = field(default_factory=dict)
    homomorphisms: list[Homomorphism] = field(default_factory=list)


class StructureFile(LogicDataFile):
    default_filename = "structures.struct"
    definitions = {
        "sig": "read_signature",
        "struct": "read_structure",
        "hom": "read_homomorphism",
    }

    def empty_records(self) -> Records:
        return {"signature": [], "structures": [], "homomorphisms": []}

    def read_signature(self, records: Records, rest: str, number: int) -> None:
        records["signature"] += [list(pair) for pair in Signature.parse(rest).connectives]

    def read_structure(self, records: Records, rest: str, number: int) -> None:
        head, *entries = [chunk.strip() for chunk in rest.split(";")]
        name, _, carrier = head.partition(" ")
        keyword, _, elements = carrier.strip().partition(" ")
        if not name or keyword != "carrier":
            raise PresentationFormatError("expected 'struct <name> carrier <elements> ; ...'", number)
        table = []
        for entry in entries:
            if not entry:
                continue
            left, sep, value = entry.partition("->")
            tokens = left.split()
            if not sep or not tokens or not value.strip():
                raise PresentationFormatError(f"bad operation entry {entry!r}", number)
            table.append([tokens[0], tokens[1:], value.strip()])
        records["structures"].append({"name": name, "carrier": elements.split(), "table": table, "line": number})

    def read_homomorphism(self, records: Records, rest: str, number: int) -> None:
        head, sep, body = rest.partition(":")
        source, arrow, target = head.partition("->")
        if not sep or not arrow or not source.strip() or not target.strip():
            raise PresentationFormatError("expected 'hom <A> -> <B> : <e>-><e> ...'", number)
        mapping = [list(pair) for pair in HOM_ENTRY.findall(body)]
        records["homomorphisms"].append(
            {"source": source.strip(), "target": target.strip(), "mapping": mapping, "line": number}
        )

    def write(self, records: Records) -> str:
        lines = ["sig " + " ".join(f"{name}:{arity}" for name, arity in records["signature"])]
        for structure in records["structures"]:
            chunks = [f"struct {structure['name']} carrier {' '.join(structure['carrier'])}"]
            for symbol, args, value in structure["table"]:
                chunks.append(" ".join([symbol, *args, "->", value]))
            lines.append(" ; ".join(chunks))
        for hom in records["homomorphisms"]:
            entries = " ".join(f"{a}->{b}" for a, b in hom["mapping"])
            lines.append(f"hom {hom['source']} -> {hom['target']} : {entries}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def build(records: Records) -> StructureCatalog:
        signature = Signature(tuple(tuple(pair) for pair in records["signature"]))
        catalog = StructureCatalog(signature)
        for structure in records["structures"]:
            interpretation: dict[str, dict] = {symbol: {} for symbol, _ in signature.connectives}
            for symbol, args, value in structure["table"]:
                if symbol not in signature:
                    raise PresentationFormatError(f"unknown connective {symbol!r}", structure.get("line"))
                interpretation[symbol][tuple(args)] = value
            try:
                catalog.structures[structure["name"]] = FiniteStructure(
                    signature, structure["carrier"], interpretation, structure["name"]
                )
            except ValueError as e:
                raise PresentationFormatError(str(e), structure.get("line")) from e
        for hom in records["homomorphisms"]:
            try:
                source = catalog.structures[hom["source"]]
                target = catalog.structures[hom["target"]]
            except KeyError as e:
                raise PresentationFormatError(f"unknown structure {e.args[0]!r}", hom.get("line")) from None
            catalog.homomorphisms.append(Homomorphism(source, target, dict(hom["mapping"])).verify())
        return catalog

    def read_catalog(self, filename: str = None) -> StructureCatalog:
        return self.build(self.read_file(filename))

    def parse_catalog(self, text: str) -> StructureCatalog:
        return self.build(self.loads(text))
