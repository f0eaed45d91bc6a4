package cast

import "unsafe"

type Policy struct {
	Level int
	Name  string
}

type ExternalPolicy struct {
	Level int
	Name  string
}

func Convert(in *Policy) *ExternalPolicy {
	return (*ExternalPolicy)(unsafe.Pointer(in))
}
