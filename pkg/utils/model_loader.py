"""
模型文件加载模块

读取 JSON 模型文件，先按 network_model.schema.json 做结构校验，再做语义校验。
"""

import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Union

import jsonschema

from config import load_schema
from models import NetworkModel, RoutingMatrix, StationSpec
from solver.errors import ModelValidationError
from solver.network import n_max, validate_model

logger = logging.getLogger(__name__)


def parse_model(data: Dict[str, Any]) -> NetworkModel:
    """
    从字典解析并校验模型

    Args:
        data: 模型文件内容

    Returns:
        NetworkModel: 已校验的模型

    Raises:
        ModelValidationError: 结构或语义校验失败
    """
    try:
        jsonschema.validate(instance=data, schema=load_schema('network_model'))
    except jsonschema.ValidationError as e:
        location = '/'.join(str(p) for p in e.absolute_path) or '<root>'
        raise ModelValidationError(f"模型文件不符合 Schema ({location}): {e.message}") from e

    stations = tuple(StationSpec.from_dict(item) for item in data['stations'])
    raw = NetworkModel(stations=stations, routing=RoutingMatrix.from_rows(data['routing']))
    reference = data.get('reference')
    if reference is not None:
        try:
            raw = replace(raw, reference=raw.station_index(reference))
        except KeyError as e:
            raise ModelValidationError(f"参考站无效: {e.args[0]}") from e
    return validate_model(raw)


def load_model(file_path: Union[str, Path]) -> NetworkModel:
    """
    加载模型文件

    Args:
        file_path: JSON 文件路径

    Returns:
        NetworkModel: 已校验的模型

    Raises:
        FileNotFoundError: 文件不存在
        ModelValidationError: 文件不是合法 JSON 或校验失败
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"模型文件不存在: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ModelValidationError(f"模型文件不是合法 JSON: {e}") from e

    model = parse_model(data)
    logger.info(f"✓ 加载模型 {path.name}: {model.size} 个站点, n_max={n_max(model)}")
    return model


def model_to_dict(model: NetworkModel) -> Dict[str, Any]:
    """转换为模型文件格式（参考站以名称写出）"""
    return {
        'stations': [station.to_dict() for station in model.stations],
        'routing': [list(row) for row in model.routing.entries],
        'reference': model.stations[model.reference].name
    }


def save_model(model: NetworkModel, file_path: Union[str, Path]) -> None:
    """
    保存模型文件

    Args:
        model: 网络模型
        file_path: 输出路径
    """
    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f, ensure_ascii=False, indent=2)
    logger.info(f"✓ 已保存模型到: {file_path}")
