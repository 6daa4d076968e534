import json
from typing import Any

from jinja2 import Environment, StrictUndefined, Template, TemplateSyntaxError, UndefinedError


def _bullets(items: Any, empty: str = "none") -> str:
    lines = [f"- {item}" for item in items or []]
    return "\n".join(lines) if lines else empty


class TemplateRenderer:
    """jinja2 renderer for the role prompts; undefined variables are errors"""

    def __init__(self) -> None:
        self.env = Environment(undefined=StrictUndefined, autoescape=False)
        # sorted keys so identical scene graphs render to identical prompts
        self.env.filters["tojson"] = lambda obj: json.dumps(obj, indent=2, sort_keys=True)
        self.env.filters["bullets"] = _bullets
        # role prompts are rendered every step, compile each source once
        self._compiled: dict[str, Template] = {}

    def _compile(self, template_str: str) -> Template:
        template = self._compiled.get(template_str)
        if template is None:
            try:
                template = self.env.from_string(template_str)
            except TemplateSyntaxError as e:
                raise ValueError(f"template syntax error at line {e.lineno}: {e.message}")
            self._compiled[template_str] = template
        return template

    def render(self, template_str: str, context: dict[str, Any]) -> str:
        """
        render a prompt template and strip surrounding whitespace

        filters: {{ raw | tojson }}, {{ issues | bullets }}
        """
        template = self._compile(template_str)
        try:
            return template.render(**context).strip()
        except UndefinedError as e:
            raise ValueError(f"undefined variable in template: {e.message}")
        except Exception as e:
            raise ValueError(f"template rendering error: {str(e)}")


_renderer = TemplateRenderer()


def render_template(template_str: str, context: dict[str, Any]) -> str:
    return _renderer.render(template_str, context)
